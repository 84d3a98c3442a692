#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nslab/errors.hpp"
#include "nslab/kernels.hpp"
#include "nslab/spectral.hpp"
#include "nslab/transport_demo.hpp"

using namespace nslab;

namespace {

double grad_sup(const VectorField& u) {
    double m = 0.0;
    for (int a = 0; a < u.dim(); ++a)
        for (int b = 0; b < u.dim(); ++b) m = std::max(m, max_abs(derivative(u[a], b)));
    return m;
}

double grad_l2(const VectorField& u) {
    double acc = 0.0;
    for (int a = 0; a < u.dim(); ++a)
        for (int b = 0; b < u.dim(); ++b) {
            double l = l2_norm(derivative(u[a], b));
            acc += l * l;
        }
    return std::sqrt(acc);
}

double lip_sup(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    std::vector<ScalarField> d;
    for (int b = 0; b < g.d; ++b) d.push_back(derivative(f, b));
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double s2 = 0.0;
        for (const ScalarField& db : d) s2 += db[i] * db[i];
        m = std::max(m, std::sqrt(s2));
    }
    return m;
}

// Mean kernel width: integral of |z| against the unit-mass kernel.
double mollifier_width(const TorusGrid& g, double h, double a) {
    Kernel kb = build_mollifier(g, h, a);
    double acc = 0.0;
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        acc += kb.field[lin] * torus_node_radius(g, idx);
    });
    return acc / static_cast<double>(g.size());
}

const std::vector<double> kLadder4 = {0.25, 0.125, 0.0625, 0.03125};

} // namespace

TEST_CASE("divergence-free generators: solenoidal, scaled, deterministic") {
    TorusGrid g(2, 64);
    {
        Rng rng(9);
        VectorField u = rough_divfree_velocity(g, rng, 2.0);
        CHECK(max_abs(divergence(u)) <= 1e-10 * grad_l2(u));
        CHECK(grad_l2(u) == doctest::Approx(2.0).epsilon(1e-12));
        Rng rng2(9);
        VectorField v = rough_divfree_velocity(g, rng2, 2.0);
        for (int a = 0; a < 2; ++a)
            for (std::size_t i = 0; i < u[a].size(); ++i) CHECK(u[a][i] == v[a][i]);
    }
    {
        Rng rng(5);
        VectorField u = smooth_divfree_velocity(g, rng, 3.0);
        CHECK(max_abs(divergence(u)) <= 1e-10 * grad_sup(u));
        CHECK(grad_sup(u) == doctest::Approx(3.0).epsilon(1e-12));
    }
    TorusGrid line(1, 64);
    Rng rng(1);
    CHECK_THROWS_AS(rough_divfree_velocity(line, rng, 1.0), ConfigError);
    CHECK_THROWS_AS(smooth_divfree_velocity(line, rng, 1.0), ConfigError);
    CHECK_THROWS_AS(smooth_divfree_velocity(g, rng, 0.0), ConfigError);
    TorusGrid coarse(2, 8);
    CHECK_THROWS_AS(rough_divfree_velocity(coarse, rng, 1.0), ConfigError);
}

TEST_CASE("zero velocity: oscillation frozen, weight pinned at one") {
    TorusGrid g(2, 32);
    Rng rng(77);
    ScalarField rho0 = random_smooth_field(g, rng, 3, 1.0, 0.5);
    VectorField u(g); // zero field
    TransportDemoResult res = linear_transport_demo(u, rho0, kLadder4);
    CHECK(res.steps == 1);
    CHECK(res.mass_drift <= 1e-14);
    CHECK(res.w_min == 1.0);
    CHECK(res.w_max == 1.0);
    REQUIRE(res.rows.size() == 4);
    for (const TransportDemoRow& r : res.rows) {
        CHECK(r.osc_final == doctest::Approx(r.osc_initial).epsilon(1e-12));
        CHECK(r.osc_weighted == doctest::Approx(r.osc_final).epsilon(1e-12));
    }
}

TEST_CASE("smooth stirring obeys the Lipschitz flow bound at every scale") {
    TorusGrid g(2, 64);
    for (unsigned seed : {5u, 6u}) {
        Rng rng(seed);
        VectorField u = smooth_divfree_velocity(g, rng, 2.0);
        Rng rng2(seed + 50);
        ScalarField rho0 = random_smooth_field(g, rng2, 2, 1.0, 0.5);
        TransportDemoOptions opt;
        opt.t_end = 0.5;
        TransportDemoResult res = linear_transport_demo(u, rho0, kLadder4, opt);
        // divergence-free flow stretches gradients at most exponentially, so
        // the increment bound |drho| <= Lip |z| caps the oscillation by the
        // kernel width: an O(h)-type decay, far stronger than any log rate
        const double flow_lip = lip_sup(rho0) * std::exp(grad_sup(u) * opt.t_end);
        for (const TransportDemoRow& r : res.rows) {
            double cap = flow_lip * mollifier_width(g, r.h, 3.0);
            CHECK(r.osc_final <= cap);
            CHECK(r.osc_final >= 0.0);
        }
        CHECK(res.rho_min > 0.4);
        CHECK(res.rho_max < 1.7);
        CHECK(res.mass_drift <= 1e-12);
    }
}

TEST_CASE("rough stirring lands in the log-decay band") {
    TorusGrid g(2, 128);
    Rng rng(11);
    VectorField u = rough_divfree_velocity(g, rng, 2.0);
    Rng rng2(111);
    ScalarField rho0 = random_smooth_field(g, rng2, 1, 1.0, 0.5);
    auto ladder = default_h_ladder(g);
    REQUIRE(ladder.size() == 4);
    TransportDemoResult res = linear_transport_demo(u, rho0, ladder);
    CHECK(res.fit.theta >= 0.5);
    CHECK(res.fit.theta <= 2.0);
    CHECK(res.fit.log_residual_rms < 0.2);
    CHECK(!res.fit.flat);
    CHECK(res.mass_drift <= 1e-12);
    CHECK(res.rho_min > 0.0);
    // the gradient penalization bites: weights drop and damp the functional
    CHECK(res.w_min >= 0.0);
    CHECK(res.w_max < 1.0);
    for (const TransportDemoRow& r : res.rows) {
        CHECK(r.osc_weighted <= r.osc_final * (1.0 + 1e-15));
        CHECK(r.osc_weighted < 0.5 * r.osc_final);
        CHECK(r.osc_final > 0.0);
    }
    // finer kernels see less oscillation, monotonically along the ladder
    for (std::size_t i = 1; i < res.rows.size(); ++i)
        CHECK(res.rows[i].osc_final < res.rows[i - 1].osc_final);
}

TEST_CASE("violent stirring trips the density guard") {
    TorusGrid g(2, 128);
    Rng rng(13);
    VectorField u = rough_divfree_velocity(g, rng, 8.0);
    Rng rng2(113);
    ScalarField rho0 = random_smooth_field(g, rng2, 3, 1.0, 0.5);
    TransportDemoOptions opt;
    opt.t_end = 1.0;
    CHECK_THROWS_AS(linear_transport_demo(u, rho0, default_h_ladder(g), opt),
                    NegativeDensityError);
}

TEST_CASE("demo input validation") {
    TorusGrid g(2, 32);
    Rng rng(3);
    ScalarField rho0 = random_smooth_field(g, rng, 2, 1.0, 0.5);
    VectorField u(g);
    TorusGrid other(2, 16);
    VectorField u_other(other);
    CHECK_THROWS_AS(linear_transport_demo(u_other, rho0, kLadder4), ConfigError);
    CHECK_THROWS_AS(linear_transport_demo(u, rho0, std::span<const double>{}), ConfigError);
    const double bad_h[1] = {0.6};
    CHECK_THROWS_AS(linear_transport_demo(u, rho0, bad_h), ConfigError);
    ScalarField flat(g, 0.0);
    CHECK_THROWS_AS(linear_transport_demo(u, flat, kLadder4), ConfigError);
    TransportDemoOptions opt;
    opt.t_end = 0.0;
    CHECK_THROWS_AS(linear_transport_demo(u, rho0, kLadder4, opt), ConfigError);
}

TEST_CASE("result text is deterministic and carries the rate table") {
    TorusGrid g(2, 32);
    Rng rng(21);
    ScalarField rho0 = random_smooth_field(g, rng, 3, 1.0, 0.5);
    VectorField u(g);
    TransportDemoResult res = linear_transport_demo(u, rho0, kLadder4);
    std::string text = res.to_text();
    CHECK(text == res.to_text());
    CHECK(text.find("transport demo:") != std::string::npos);
    CHECK(text.find("h,osc_initial,osc_final,osc_weighted") != std::string::npos);
    CHECK(text.find("theta") != std::string::npos);
    CHECK(text.find("0.25") != std::string::npos);
}
