#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "nslab/fft.hpp"
#include "nslab/field_io.hpp"
#include "nslab/grid.hpp"
#include "nslab/rng.hpp"
#include "nslab/spectral.hpp"
#include "support/oracles.hpp"

using namespace nslab;

TEST_CASE("grid rejects bad parameters") {
    CHECK_THROWS_AS(TorusGrid(0, 16), ConfigError);
    CHECK_THROWS_AS(TorusGrid(4, 16), ConfigError);
    CHECK_THROWS_AS(TorusGrid(2, 17), ConfigError);
    CHECK_THROWS_AS(TorusGrid(2, 0), ConfigError);
    TorusGrid g(2, 16);
    CHECK(g.spacing() == doctest::Approx(1.0 / 16));
    CHECK(g.size() == 256);
    CHECK(g.spectral_size() == 16 * 9);
}

TEST_CASE("forward transform matches direct DFT on the half lattice") {
    for (int d : {1, 2}) {
        TorusGrid g(d, 16);
        Rng rng(42 + static_cast<std::uint64_t>(d));
        ScalarField f(g);
        for (double& x : f.values()) x = rng.uniform(-1.0, 1.0);

        auto ref = oracle::dft_forward(f);
        SpectralField c = forward_fft(f);
        double worst = 0.0;
        for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
            // Map the signed frequency vector onto the full-lattice index.
            std::size_t full = 0;
            for (int a = 0; a < d; ++a) {
                int i = k[a] < 0 ? k[a] + g.n : k[a];
                full = full * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i);
            }
            worst = std::max(worst, std::abs(c[lin] - ref[full]));
        });
        CHECK(worst < 1e-13);
    }
}

TEST_CASE("transform round trip and Parseval") {
    for (int d : {1, 2, 3}) {
        TorusGrid g(d, d == 3 ? 16 : 32);
        Rng rng(7);
        ScalarField f(g);
        for (double& x : f.values()) x = rng.uniform(-2.0, 2.0);

        SpectralField c = forward_fft(f);
        ScalarField back = inverse_fft(c);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(f[i] - back[i]));
        CHECK(worst < 1e-12);

        double phys = 0.0;
        for (double x : f.values()) phys += x * x;
        phys /= static_cast<double>(g.size());
        CHECK(std::abs(phys - spectral_energy(c)) < 1e-12 * std::max(1.0, phys));
    }
}

TEST_CASE("constant field transforms to a single coefficient") {
    TorusGrid g(3, 8);
    ScalarField f(g, 3.25);
    SpectralField c = forward_fft(f);
    CHECK(std::abs(c[0] - std::complex<double>(3.25, 0.0)) < 1e-14);
    double rest = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) rest = std::max(rest, std::abs(c[i]));
    CHECK(rest < 1e-14);
}

TEST_CASE("derivatives are exact on band-limited trig polynomials") {
    TorusGrid g(2, 32);
    auto f = sample(g, [](std::span<const double> x) {
        return std::sin(oracle::two_pi * 3 * x[0]) * std::cos(oracle::two_pi * 5 * x[1]) +
               0.5 * std::cos(oracle::two_pi * 2 * x[0]);
    });
    auto dfdx_exact = sample(g, [](std::span<const double> x) {
        return oracle::two_pi * 3 * std::cos(oracle::two_pi * 3 * x[0]) * std::cos(oracle::two_pi * 5 * x[1]) -
               oracle::two_pi * std::sin(oracle::two_pi * 2 * x[0]);
    });
    ScalarField dfdx = derivative(f, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(dfdx[i] - dfdx_exact[i]));
    CHECK(worst < 1e-11);

    // And agree with centered differences to O(h^2) on a smooth random field.
    Rng rng(11);
    ScalarField r = random_smooth_field(g, rng, 4, 0.0, 1.0);
    ScalarField ds = derivative(r, 1);
    ScalarField dfd = oracle::fd_derivative(r, 1);
    double err = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) err = std::max(err, std::abs(ds[i] - dfd[i]));
    CHECK(err < 2.0); // h^2 * |f'''| scale at kmax=4, loose by design
}

TEST_CASE("laplacian and its zero-mean inverse compose to identity") {
    TorusGrid g(3, 16);
    Rng rng(3);
    ScalarField f = random_smooth_field(g, rng, 5, 0.0, 1.0);
    // Remove the mean so Laplace^{-1} Laplace f = f exactly.
    double mu = mean(f);
    for (double& x : f.values()) x -= mu;

    ScalarField lf = laplacian(f);
    ScalarField back = inverse_laplacian_zero_mean(lf);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(f[i] - back[i]));
    CHECK(worst < 1e-10);
    CHECK(std::abs(mean(back)) < 1e-13);
}

TEST_CASE("divergence-free projection is idempotent and kills gradients") {
    TorusGrid g(2, 32);
    Rng rng(5);
    VectorField u = random_smooth_vector(g, rng, 6, 1.0);

    VectorField pu = project_divergence_free(u);
    ScalarField div_pu = divergence(pu);
    CHECK(max_abs(div_pu) < 1e-10);

    VectorField ppu = project_divergence_free(pu);
    double worst = 0.0;
    for (int a = 0; a < g.d; ++a)
        for (std::size_t i = 0; i < pu[a].size(); ++i)
            worst = std::max(worst, std::abs(pu[a][i] - ppu[a][i]));
    CHECK(worst < 1e-10);

    // The projection of a pure gradient vanishes.
    ScalarField phi = random_smooth_field(g, rng, 6, 0.0, 1.0);
    VectorField gphi = gradient(phi);
    VectorField pg = project_divergence_free(gphi);
    for (int a = 0; a < g.d; ++a) CHECK(max_abs(pg[a]) < 1e-10);
}

TEST_CASE("convolution matches the direct sum and preserves constants") {
    TorusGrid g(2, 16);
    Rng rng(9);
    ScalarField f(g), k(g);
    for (double& x : f.values()) x = rng.uniform(-1.0, 1.0);
    for (double& x : k.values()) x = rng.uniform(0.0, 1.0);

    ScalarField ref = oracle::convolve_direct(f, k);
    ScalarField got = convolve(f, k);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(ref[i] - got[i]));
    CHECK(worst < 1e-12);

    // Normalize the kernel to unit mass; constants must pass through.
    double km = mean(k);
    for (double& x : k.values()) x /= km;
    ScalarField c(g, 2.5);
    ScalarField cc = convolve(c, k);
    for (std::size_t i = 0; i < cc.size(); ++i) CHECK(cc[i] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("multiplier application validates and hits the zero frequency") {
    TorusGrid g(1, 16);
    ScalarField f(g, 1.0);
    // Multiplier that scales the mean by 7.
    ScalarField out = apply_multiplier(f, [](std::span<const int> k) {
        return k[0] == 0 ? std::complex<double>(7.0, 0.0) : std::complex<double>(1.0, 0.0);
    });
    CHECK(out[3] == doctest::Approx(7.0));

    CHECK_THROWS_AS(apply_multiplier(f, [](std::span<const int>) {
        return std::complex<double>(std::nan(""), 0.0);
    }), RuntimeError);
}

TEST_CASE("non-power-of-two sizes are refused") {
    CHECK_THROWS_AS(TorusGrid(2, 24), ConfigError);
}

TEST_CASE("dealias keeps low modes untouched") {
    TorusGrid g(2, 32);
    auto f = sample(g, [](std::span<const double> x) {
        return std::sin(oracle::two_pi * 2 * x[0]) + std::cos(oracle::two_pi * 15 * x[1]);
    });
    ScalarField fd = dealias_23(f);
    auto low = sample(g, [](std::span<const double> x) {
        return std::sin(oracle::two_pi * 2 * x[0]);
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(fd[i] - low[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("snapshot files round-trip bit-exactly") {
    TorusGrid g(2, 16);
    Rng rng(13);
    ScalarField rho(g);
    for (double& x : rho.values()) x = rng.uniform(0.5, 2.0);
    VectorField m(g);
    for (int a = 0; a < g.d; ++a)
        for (double& x : m[a].values()) x = rng.uniform(-1.0, 1.0);

    std::string path = (std::filesystem::temp_directory_path() / "nslab_io_test.nsf").string();
    write_state(path, rho, m);
    auto fields = read_fields(path);
    REQUIRE(fields.size() == 3);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        CHECK(fields[0][i] == rho[i]);
        CHECK(fields[1][i] == m[0][i]);
        CHECK(fields[2][i] == m[1][i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("random smooth fields respect mean, amplitude, and band limit") {
    TorusGrid g(2, 32);
    Rng rng(21);
    ScalarField f = random_smooth_field(g, rng, 5, 1.5, 0.25);
    CHECK(std::abs(mean(f) - 1.5) < 1e-12);
    double dev = 0.0;
    for (double x : f.values()) dev = std::max(dev, std::abs(x - 1.5));
    CHECK(dev == doctest::Approx(0.25).epsilon(1e-10));

    SpectralField c = forward_fft(f);
    double high = 0.0;
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        for (int v : k)
            if (std::abs(v) > 5) high = std::max(high, std::abs(c[lin]));
    });
    CHECK(high < 1e-14);
}

TEST_CASE("seeded generators replay exactly") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());
    TorusGrid g(2, 16);
    Rng r1(99), r2(99);
    ScalarField f1 = random_smooth_field(g, r1, 4, 0.0, 1.0);
    ScalarField f2 = random_smooth_field(g, r2, 4, 0.0, 1.0);
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);
}
