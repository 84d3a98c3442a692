#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "nslab/csv.hpp"
#include "nslab/errors.hpp"
#include "nslab/fft.hpp"
#include "nslab/grid.hpp"
#include "nslab/pressure.hpp"
#include "nslab/rng.hpp"
#include "nslab/solver.hpp"
#include "nslab/spectral.hpp"
#include "nslab/stress.hpp"

using namespace nslab;

namespace {

constexpr double kPi = 3.14159265358979323846;

SolverConfig basic_cfg(int d, double mu, double lambda, double gamma, double dt, double t_end) {
    SolverConfig cfg;
    cfg.law = PressureLaw::make_power(1.0, gamma);
    cfg.stress = AnisotropySpec::isotropic(mu, lambda, d);
    cfg.dt = dt;
    cfg.t_end = t_end;
    return cfg;
}

} // namespace

TEST_CASE("a resting uniform state does not move") {
    TorusGrid g(2, 16);
    SolverConfig cfg = basic_cfg(2, 1.0, 0.0, 1.4, 0.01, 0.05);
    SymMatrix dA{{{0.2, 0.0, 0}, {0.0, -0.2, 0}, {0, 0, 0}}};
    cfg.stress = AnisotropySpec::constant(1.0, 0.0, 2, dA);
    cfg.alpha = 0.03;

    FluidState init(0.0, ScalarField(g, 1.3), VectorField(g));
    RunResult res = run(init, cfg);
    REQUIRE_FALSE(res.blew_up);
    const FluidState& fin = res.trajectory.back();
    CHECK(fin.t == doctest::Approx(0.05).epsilon(1e-12));
    for (std::size_t i = 0; i < fin.rho.size(); ++i) {
        CHECK(fin.rho[i] == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(std::abs(fin.m[0][i]) <= 1e-12);
        CHECK(std::abs(fin.m[1][i]) <= 1e-12);
    }
    for (double mass : res.budgets.mass) CHECK(mass == doctest::Approx(1.3).epsilon(1e-13));
}

TEST_CASE("a solenoidal single mode decays at the exact viscous rate") {
    TorusGrid g(2, 32);
    const double mu = 0.3, eps = 0.1;
    SolverConfig cfg = basic_cfg(2, mu, 0.1, 2.0, 0.005, 0.1);

    VectorField m0(g);
    m0[0] = sample(g, [&](std::span<const double> x) { return eps * std::sin(2 * kPi * x[1]); });
    FluidState init(0.0, ScalarField(g, 1.0), m0);

    RunResult res = run(init, cfg);
    REQUIRE_FALSE(res.blew_up);

    const auto& ek = res.budgets.ekin;
    REQUIRE(ek.size() >= 3);
    for (std::size_t i = 0; i + 1 < ek.size(); ++i) CHECK(ek[i + 1] < ek[i] * (1.0 + 1e-12));

    double t_fin = res.trajectory.back().t;
    double pred = ek.front() * std::exp(-2.0 * mu * 4.0 * kPi * kPi * t_fin);
    CHECK(ek.back() == doctest::Approx(pred).epsilon(1e-9));
}

TEST_CASE("small acoustic oscillations ring at the dispersion-relation frequency") {
    // Linearization about rho = 1: frequency sqrt(P'(1)) |2 pi k|; here
    // P = rho^2 so P'(1) = 2 and the k = 1 mode rings at 2 pi sqrt(2).
    TorusGrid g(1, 64);
    const double eps = 1e-4;
    SolverConfig cfg = basic_cfg(1, 1e-3, 0.0, 2.0, 2e-3, 1.0);

    ScalarField rho0 = sample(g, [&](std::span<const double> x) {
        return 1.0 + eps * std::cos(2 * kPi * x[0]);
    });
    ScalarField cosx = sample(g, [](std::span<const double> x) { return std::cos(2 * kPi * x[0]); });
    FluidState s(0.0, rho0, VectorField(g));

    std::vector<double> times, amps;
    ScalarField prod(g);
    for (int i = 0; i < 500; ++i) {
        s = step(s, cfg);
        for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = s.rho[j] * cosx[j];
        times.push_back(s.t);
        amps.push_back(2.0 * mean(prod));
    }

    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < amps.size(); ++i)
        if (amps[i] * amps[i + 1] < 0.0) {
            double w = amps[i] / (amps[i] - amps[i + 1]);
            crossings.push_back(times[i] + w * (times[i + 1] - times[i]));
        }
    REQUIRE(crossings.size() >= 3);
    double period = crossings[2] - crossings[0];
    double omega = 2.0 * kPi / period;
    double predicted = std::sqrt(2.0) * 2.0 * kPi;
    CHECK(std::abs(omega - predicted) <= 0.02 * predicted);
}

TEST_CASE("mass is conserved and momentum is conserved when alpha = 0") {
    TorusGrid g(1, 64);
    ScalarField rho0 = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.3 * std::cos(2 * kPi * x[0]) + 0.1 * std::sin(4 * kPi * x[0]);
    });
    VectorField m0(g);
    m0[0] = sample(g, [](std::span<const double> x) { return 0.1 + 0.2 * std::sin(2 * kPi * x[0]); });
    FluidState init(0.0, rho0, m0);

    SUBCASE("with continuity diffusion") {
        SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.3);
        cfg.alpha = 0.02;
        RunResult res = run(init, cfg);
        REQUIRE_FALSE(res.blew_up);
        double mass0 = res.budgets.mass.front();
        for (double m : res.budgets.mass) CHECK(std::abs(m - mass0) <= 1e-10 * mass0);
    }
    SUBCASE("momentum drift vanishes without it") {
        SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.3);
        cfg.alpha = 0.0;
        RunResult res = run(init, cfg);
        REQUIRE_FALSE(res.blew_up);
        double p0 = mean(res.trajectory.front().m[0]);
        double p1 = mean(res.trajectory.back().m[0]);
        CHECK(p0 == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(std::abs(p1 - p0) <= 1e-10 * std::abs(p0));
    }
}

TEST_CASE("discrete energy stays below its initial value plus discretization slack") {
    TorusGrid g(2, 32);
    Rng rng(404);
    ScalarField rho0 = random_smooth_field(g, rng, 5, 1.0, 0.25);
    VectorField m0 = random_smooth_vector(g, rng, 5, 0.15);
    FluidState init(0.0, rho0, m0);

    auto check_budget = [](const RunResult& res, double dt) {
        REQUIRE_FALSE(res.blew_up);
        double e0 = res.budgets.ekin.front() + res.budgets.epot.front();
        for (std::size_t i = 0; i < res.budgets.size(); ++i) {
            double e = res.budgets.ekin[i] + res.budgets.epot[i] + res.budgets.diss[i];
            CHECK(e <= e0 * (1.0 + 5.0 * dt));
        }
    };

    SUBCASE("alpha = 0") {
        SolverConfig cfg = basic_cfg(2, 0.2, 0.05, 1.4, 2e-3, 0.2);
        check_budget(run(init, cfg), cfg.dt);
    }
    SUBCASE("alpha > 0 adds dissipation, never energy") {
        SolverConfig cfg = basic_cfg(2, 0.2, 0.05, 1.4, 2e-3, 0.2);
        cfg.alpha = 0.01;
        check_budget(run(init, cfg), cfg.dt);
    }
    SUBCASE("anisotropic stress: plain energy never grows beyond slack") {
        SolverConfig cfg = basic_cfg(2, 0.2, 0.05, 1.4, 2e-3, 0.2);
        SymMatrix dA{{{0.05, 0.02, 0}, {0.02, -0.05, 0}, {0, 0, 0}}};
        cfg.stress = AnisotropySpec::constant(0.2, 0.05, 2, dA);
        RunResult res = run(init, cfg);
        REQUIRE_FALSE(res.blew_up);
        double e0 = res.budgets.ekin.front() + res.budgets.epot.front();
        for (std::size_t i = 0; i < res.budgets.size(); ++i)
            CHECK(res.budgets.ekin[i] + res.budgets.epot[i] <= e0 * (1.0 + 5.0 * cfg.dt));
    }
}

TEST_CASE("energy-balance residual shrinks at second order as dt halves") {
    TorusGrid g(1, 32);
    ScalarField rho0 = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.02 * std::cos(2 * kPi * x[0]);
    });
    VectorField m0(g);
    m0[0] = sample(g, [](std::span<const double> x) { return 0.02 * std::sin(2 * kPi * x[0]); });
    FluidState init(0.0, rho0, m0);

    auto residual = [&](double dt) {
        SolverConfig cfg = basic_cfg(1, 0.05, 0.0, 1.4, dt, 0.2);
        RunResult res = run(init, cfg);
        REQUIRE_FALSE(res.blew_up);
        double e0 = res.budgets.ekin.front() + res.budgets.epot.front();
        double worst = 0.0;
        for (std::size_t i = 0; i < res.budgets.size(); ++i)
            worst = std::max(worst, std::abs(res.budgets.ekin[i] + res.budgets.epot[i] +
                                             res.budgets.diss[i] - e0));
        return worst;
    };

    double r1 = residual(2e-3);
    double r2 = residual(1e-3);
    double r3 = residual(5e-4);
    CHECK(r1 / r2 >= 3.0);
    CHECK(r2 / r3 >= 3.0);
}

TEST_CASE("negative density handling") {
    TorusGrid g(1, 32);
    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.01);

    SUBCASE("deep undershoot aborts") {
        ScalarField rho(g, 1.0);
        rho[3] = -1e-3;
        FluidState init(0.0, rho, VectorField(g));
        CHECK_THROWS_AS(run(init, cfg), NegativeDensityError);
    }
    SUBCASE("tiny undershoot is clipped and the run proceeds") {
        ScalarField rho(g, 1.0);
        rho[3] = -5e-11; // within 1e-10 * max rho
        FluidState init(0.0, rho, VectorField(g));
        RunResult res = run(init, cfg);
        REQUIRE_FALSE(res.blew_up);
        CHECK(min_value(res.trajectory.front().rho) >= 0.0);
    }
}

TEST_CASE("caps turn runaway states into clean blow-up reports") {
    TorusGrid g(1, 32);
    ScalarField rho0 = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.5 * std::cos(2 * kPi * x[0]);
    });
    FluidState init(0.0, rho0, VectorField(g));

    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.5);
    cfg.max_density = 1.2; // below the initial max: the first step refuses

    CHECK_THROWS_AS(step(init, cfg), BlowUpError);

    RunResult res = run(init, cfg);
    CHECK(res.blew_up);
    CHECK_FALSE(res.abort_reason.empty());
    CHECK(res.trajectory.size() == 1); // the initial state is the partial output
    CHECK(res.budgets.size() == 1);
}

TEST_CASE("non-finite input is a configuration error at run entry, blow-up inside step") {
    TorusGrid g(1, 16);
    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.01);
    ScalarField rho(g, 1.0);
    VectorField m(g);
    m[0][2] = std::numeric_limits<double>::quiet_NaN();
    FluidState bad(0.0, rho, m);
    CHECK_THROWS_AS(run(bad, cfg), ConfigError);
    CHECK_THROWS_AS(step(bad, cfg), BlowUpError);
}

TEST_CASE("initial data close to a pressure pole is refused") {
    TorusGrid g(1, 32);
    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 2.0, 1e-3, 0.01);
    cfg.law = PressureLaw::make_van_der_waals(1.0, 2.0, 1.0, 1.0); // pole at rho = 2

    ScalarField hot = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.95 * std::cos(2 * kPi * x[0]);
    });
    CHECK_THROWS_AS(run(FluidState(0.0, hot, VectorField(g)), cfg), ConfigError);

    ScalarField mild = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.3 * std::cos(2 * kPi * x[0]);
    });
    RunResult res = run(FluidState(0.0, mild, VectorField(g)), cfg);
    CHECK_FALSE(res.blew_up);
}

TEST_CASE("effective flux: stationary pair gives zero, manufactured pair matches") {
    TorusGrid g(1, 64);

    SUBCASE("stationary") {
        FluidState a(0.0, ScalarField(g, 1.1), VectorField(g));
        FluidState b(0.1, ScalarField(g, 1.1), VectorField(g));
        CHECK(max_abs(effective_flux(a, b)) <= 1e-13);
    }
    SUBCASE("single-mode momentum pulse") {
        // m(t,x) = g(t) sin(2 pi x), rho = 1. With gd the two-point slope and
        // gm the midpoint value, the flux potential is
        //   -gd cos(2 pi x)/(2 pi) - gm^2 cos(4 pi x)/2.
        auto gt = [](double t) { return std::sin(3.0 * t); };
        const double t0 = 0.3, dt = 0.01;
        VectorField m1(g), m2(g);
        m1[0] = sample(g, [&](std::span<const double> x) { return gt(t0) * std::sin(2 * kPi * x[0]); });
        m2[0] = sample(g, [&](std::span<const double> x) { return gt(t0 + dt) * std::sin(2 * kPi * x[0]); });
        FluidState a(t0, ScalarField(g, 1.0), m1);
        FluidState b(t0 + dt, ScalarField(g, 1.0), m2);

        ScalarField flux = effective_flux(a, b);
        const double gd = (gt(t0 + dt) - gt(t0)) / dt;
        const double gm = 0.5 * (gt(t0) + gt(t0 + dt));
        ScalarField pred = sample(g, [&](std::span<const double> x) {
            return -gd * std::cos(2 * kPi * x[0]) / (2 * kPi) -
                   0.5 * gm * gm * std::cos(4 * kPi * x[0]);
        });
        for (std::size_t i = 0; i < pred.size(); ++i)
            CHECK(flux[i] == doctest::Approx(pred[i]).epsilon(1e-10));
    }
}

TEST_CASE("dealiased runs keep the upper spectral third empty") {
    TorusGrid g(1, 32);
    Rng rng(99);
    ScalarField rho0 = random_smooth_field(g, rng, 5, 1.0, 0.3);
    VectorField m0 = random_smooth_vector(g, rng, 5, 0.2);
    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.05);
    cfg.dealias = true;

    RunResult res = run(FluidState(0.0, rho0, m0), cfg);
    REQUIRE_FALSE(res.blew_up);
    SpectralField c = forward_fft(res.trajectory.back().rho);
    double peak = 0.0, tail = 0.0;
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double mag = std::abs(c[lin]);
        peak = std::max(peak, mag);
        bool high = false;
        for (int a = 0; a < g.d; ++a)
            if (3 * std::abs(k[a]) > g.n) high = true;
        if (high) tail = std::max(tail, mag);
    });
    CHECK(tail <= 1e-13 * peak);
}

TEST_CASE("budget rows survive the CSV round trip and match a re-measurement") {
    TorusGrid g(1, 32);
    Rng rng(7);
    ScalarField rho0 = random_smooth_field(g, rng, 4, 1.0, 0.2);
    VectorField m0 = random_smooth_vector(g, rng, 4, 0.1);
    SolverConfig cfg = basic_cfg(1, 0.1, 0.05, 1.6, 2e-3, 0.02);
    cfg.alpha = 0.01;

    RunResult res = run(FluidState(0.0, rho0, m0), cfg);
    REQUIRE_FALSE(res.blew_up);

    res.budgets.to_csv("solver_budget_roundtrip.csv");
    CsvTable tab = read_csv("solver_budget_roundtrip.csv");
    REQUIRE(tab.header == std::vector<std::string>{"t", "mass", "ekin", "epot", "diss", "rho_gamma_a"});
    int col = tab.column("ekin");
    REQUIRE(tab.rows.size() == res.budgets.size());
    for (std::size_t i = 0; i < tab.rows.size(); ++i)
        CHECK(tab.rows[i][static_cast<std::size_t>(col)] == res.budgets.ekin[i]);

    SolverConfig mcfg = cfg;
    mcfg.rho_floor = res.rho_floor_used;
    BudgetSample b = measure_budget(res.trajectory.back(), mcfg);
    CHECK(b.mass == doctest::Approx(res.budgets.mass.back()).epsilon(1e-14));
    CHECK(b.ekin == doctest::Approx(res.budgets.ekin.back()).epsilon(1e-14));
    CHECK(b.epot == doctest::Approx(res.budgets.epot.back()).epsilon(1e-14));
    CHECK(b.rho_gamma_a == doctest::Approx(res.budgets.rho_gamma_a.back()).epsilon(1e-14));

    // the integrability exponent is gamma (1 + 2/d) - 1
    CHECK(res.budgets.integrability_exponent == doctest::Approx(1.6 * 3.0 - 1.0).epsilon(1e-14));
}

TEST_CASE("snapshot cadence: every k-th step plus both ends") {
    TorusGrid g(1, 16);
    ScalarField rho0 = sample(g, [](std::span<const double> x) {
        return 1.0 + 0.05 * std::cos(2 * kPi * x[0]);
    });
    SolverConfig cfg = basic_cfg(1, 0.1, 0.0, 1.4, 1e-2, 0.12);
    cfg.snapshot_every = 5;

    RunResult res = run(FluidState(0.0, rho0, VectorField(g)), cfg);
    REQUIRE_FALSE(res.blew_up);
    REQUIRE(res.trajectory.size() == 4); // t = 0, 0.05, 0.10, 0.12
    CHECK(res.trajectory[1].t == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(res.trajectory[2].t == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(res.trajectory[3].t == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(res.budgets.size() == 13);
}

TEST_CASE("configuration rejection") {
    TorusGrid g(1, 16);
    FluidState init(0.0, ScalarField(g, 1.0), VectorField(g));
    SolverConfig cfg = basic_cfg(2, 0.1, 0.0, 1.4, 1e-3, 0.01); // wrong dimension
    CHECK_THROWS_AS(step(init, cfg), ConfigError);

    SolverConfig bad = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.01);
    bad.dt = 0.0;
    CHECK_THROWS_AS(step(init, bad), ConfigError);
    bad = basic_cfg(1, 0.1, 0.0, 1.4, 1e-3, 0.01);
    bad.alpha = -0.1;
    CHECK_THROWS_AS(run(init, bad), ConfigError);
}
