#include "nslab/rng.hpp"

#include "nslab/fft.hpp"

#include <cmath>

namespace nslab {

ScalarField random_smooth_field(const TorusGrid& g, Rng& rng, int kmax,
                                double mean_value, double amplitude) {
    if (kmax < 1 || kmax > g.n / 2 - 1) throw ConfigError("random_smooth_field: kmax out of range");

    // Fill the half lattice directly; the deterministic spectral iteration
    // order makes the draw sequence independent of any FFT internals.
    SpectralField c(g);
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double k2 = 0.0;
        bool in_band = true;
        for (int v : k) {
            if (std::abs(v) > kmax) in_band = false;
            k2 += static_cast<double>(v) * v;
        }
        if (!in_band || k2 == 0.0) return;
        // Stored coefficients whose conjugate is also stored (k_last == 0 or
        // Nyquist) must pair up Hermitianly; simplest is to make those real.
        double taper = std::exp(-k2 / (static_cast<double>(kmax) * kmax));
        bool self_paired = (k[g.d - 1] == 0 || k[g.d - 1] == g.n / 2);
        double re = rng.gaussian() * taper;
        double im = self_paired ? 0.0 : rng.gaussian() * taper;
        c[lin] = std::complex<double>(re, im);
    });
    // Enforce conjugate symmetry on the k_last==0 / Nyquist planes, where the
    // stored lattice contains both k and -k.
    if (g.d >= 2) {
        const int n = g.n, last = n / 2 + 1;
        auto idx2 = [&](int i0, int i1) { return static_cast<std::size_t>(i0) * last + i1; };
        auto wrap = [&](int i) { return (n - i) % n; };
        if (g.d == 2) {
            for (int i1 : {0, n / 2})
                for (int i0 = n / 2 + 1; i0 < n; ++i0)
                    c[idx2(i0, i1)] = std::conj(c[idx2(wrap(i0), i1)]);
        } else {
            auto idx3 = [&](int i0, int i1, int i2) {
                return (static_cast<std::size_t>(i0) * n + i1) * last + i2;
            };
            for (int i2 : {0, n / 2})
                for (int i0 = 0; i0 < n; ++i0)
                    for (int i1 = 0; i1 < n; ++i1) {
                        int j0 = wrap(i0), j1 = wrap(i1);
                        // Copy from the lexicographically smaller partner.
                        if (std::make_pair(i0, i1) > std::make_pair(j0, j1))
                            c[idx3(i0, i1, i2)] = std::conj(c[idx3(j0, j1, i2)]);
                    }
        }
    }

    ScalarField f = inverse_fft(c);
    double m = max_abs(f);
    if (m > 0.0 && amplitude > 0.0) {
        double s = amplitude / m;
        for (double& x : f.values()) x = mean_value + s * x;
    } else {
        for (double& x : f.values()) x += mean_value;
    }
    return f;
}

ScalarField random_integer_field(const TorusGrid& g, Rng& rng, int top) {
    ScalarField f(g);
    for (double& x : f.values()) x = static_cast<double>(rng.uniform_int(0, top));
    return f;
}

VectorField random_smooth_vector(const TorusGrid& g, Rng& rng, int kmax, double amplitude) {
    VectorField u(g);
    for (int a = 0; a < g.d; ++a) u[a] = random_smooth_field(g, rng, kmax, 0.0, amplitude);
    return u;
}

} // namespace nslab
