#include "nslab/transport_demo.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "nslab/csv.hpp"
#include "nslab/errors.hpp"
#include "nslab/fft.hpp"
#include "nslab/kernels.hpp"
#include "nslab/maximal.hpp"
#include "nslab/oscillation.hpp"
#include "nslab/spectral.hpp"
#include "nslab/weights.hpp"

namespace nslab {

namespace {

VectorField curl_of_stream(const ScalarField& psi) {
    const TorusGrid& g = psi.grid();
    VectorField u(g);
    ScalarField dx = derivative(psi, 0);
    ScalarField dy = derivative(psi, 1);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        u[0][i] = -dy[i];
        u[1][i] = dx[i];
    }
    return u;
}

double max_speed(const VectorField& u) {
    double vmax = 0.0;
    for (std::size_t i = 0; i < u[0].size(); ++i) {
        double s2 = 0.0;
        for (int a = 0; a < u.dim(); ++a) s2 += u[a][i] * u[a][i];
        vmax = std::max(vmax, std::sqrt(s2));
    }
    return vmax;
}

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
            ScalarField d = derivative(u[a], b);
            double l = l2_norm(d);
            acc += l * l;
        }
    return std::sqrt(acc);
}

void scale_velocity(VectorField& u, double factor) {
    for (int a = 0; a < u.dim(); ++a)
        for (std::size_t i = 0; i < u[a].size(); ++i) u[a][i] *= factor;
}

// -div(rho u) with the product filtered before differentiation.
ScalarField continuity_rhs(const ScalarField& rho, const VectorField& u) {
    const TorusGrid& g = rho.grid();
    ScalarField out(g, 0.0);
    ScalarField flux(g);
    for (int a = 0; a < g.d; ++a) {
        for (std::size_t i = 0; i < rho.size(); ++i) flux[i] = rho[i] * u[a][i];
        ScalarField dfa = derivative(dealias_23(flux), a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= dfa[i];
    }
    return out;
}

ScalarField heun_step(const ScalarField& rho, const VectorField& u, double dt) {
    ScalarField k1 = continuity_rhs(rho, u);
    ScalarField mid(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) mid[i] = rho[i] + dt * k1[i];
    mid = dealias_23(mid);
    ScalarField k2 = continuity_rhs(mid, u);
    ScalarField next(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i)
        next[i] = rho[i] + 0.5 * dt * (k1[i] + k2[i]);
    return dealias_23(next);
}

} // namespace

VectorField smooth_divfree_velocity(const TorusGrid& g, Rng& rng, double amplitude) {
    if (g.d != 2) throw ConfigError("divfree velocity: needs d = 2");
    if (!(amplitude > 0.0)) throw ConfigError("divfree velocity: amplitude must be positive");
    ScalarField psi = random_smooth_field(g, rng, 2, 0.0, 1.0);
    VectorField u = curl_of_stream(psi);
    double sup = grad_sup(u);
    if (sup <= 0.0) throw RuntimeError("divfree velocity: degenerate stream sample");
    scale_velocity(u, amplitude / sup);
    return u;
}

VectorField rough_divfree_velocity(const TorusGrid& g, Rng& rng, double amplitude) {
    if (g.d != 2) throw ConfigError("divfree velocity: needs d = 2");
    if (!(amplitude > 0.0)) throw ConfigError("divfree velocity: amplitude must be positive");
    const int kmax = g.n / 3;
    if (kmax < 4) throw ConfigError("divfree velocity: grid too coarse for a cascade");

    // |psi_hat| ~ |k|^-3: borderline-H^1 velocity, every octave of grad u
    // carries comparable energy and the sup of grad u diverges like log n.
    SpectralField psihat(g);
    for (std::size_t i = 0; i < psihat.size(); ++i) psihat[i] = {0.0, 0.0};
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        long r2 = 0;
        for (int a = 0; a < g.d; ++a) r2 += static_cast<long>(k[a]) * k[a];
        if (r2 == 0) return;
        double r = std::sqrt(static_cast<double>(r2));
        if (r > kmax) return;
        double mag = std::pow(r, -3.0) * (0.5 + rng.uniform());
        double ph = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        psihat[lin] = 0.5 * mag * std::complex<double>(std::cos(ph), std::sin(ph));
    });
    // The k_last = 0 column stores both k and -k; restore conjugate symmetry
    // there (the Nyquist column is already empty, the cascade stops at n/3).
    {
        const int n = g.n, last = n / 2 + 1;
        for (int i0 = n / 2 + 1; i0 < n; ++i0)
            psihat[static_cast<std::size_t>(i0) * last] =
                std::conj(psihat[static_cast<std::size_t>(n - i0) * last]);
    }
    VectorField u = curl_of_stream(inverse_fft(psihat));
    double l2 = grad_l2(u);
    if (l2 <= 0.0) throw RuntimeError("divfree velocity: degenerate cascade sample");
    scale_velocity(u, amplitude / l2);
    return u;
}

std::string TransportDemoResult::to_text() const {
    std::ostringstream os;
    os << "transport demo: steps=" << steps << " dt=" << format_double(dt)
       << " mass_drift=" << format_double(mass_drift) << "\n";
    os << "rho range [" << format_double(rho_min) << ", " << format_double(rho_max)
       << "]  weight range [" << format_double(w_min) << ", " << format_double(w_max) << "]\n";
    os << "h,osc_initial,osc_final,osc_weighted\n";
    for (const TransportDemoRow& r : rows)
        os << format_double(r.h) << ',' << format_double(r.osc_initial) << ','
           << format_double(r.osc_final) << ',' << format_double(r.osc_weighted) << "\n";
    os << fit.to_text();
    return os.str();
}

TransportDemoResult linear_transport_demo(const VectorField& u, const ScalarField& rho0,
                                          std::span<const double> h_ladder,
                                          const TransportDemoOptions& opt) {
    const TorusGrid& g = rho0.grid();
    if (&u.grid() != &g && !(u.grid().d == g.d && u.grid().n == g.n))
        throw ConfigError("transport demo: velocity and density grids differ");
    if (h_ladder.empty()) throw ConfigError("transport demo: empty h ladder");
    for (double h : h_ladder)
        if (!(h > 0.0) || h > 0.5) throw ConfigError("transport demo: h must lie in (0, 1/2]");
    if (!(min_value(rho0) > 0.0))
        throw ConfigError("transport demo: density must be strictly positive");
    if (!(opt.t_end > 0.0) || !(opt.cfl > 0.0) || !(opt.lambda_pen > 0.0))
        throw ConfigError("transport demo: t_end, cfl, lambda_pen must be positive");

    const double a = opt.a_exp > 0.0 ? opt.a_exp : static_cast<double>(g.d) + 1.0;

    // Static velocity: one damping rate serves every step.
    const double vmax = max_speed(u);
    int steps = 1;
    double dt = opt.t_end;
    if (vmax > 0.0) {
        double dt_cfl = opt.cfl / (vmax * static_cast<double>(g.n));
        steps = static_cast<int>(std::ceil(opt.t_end / dt_cfl));
        dt = opt.t_end / static_cast<double>(steps);
    }

    ScalarField rate = maximal_function(gradient_magnitude(u));
    for (std::size_t i = 0; i < rate.size(); ++i) rate[i] *= opt.lambda_pen;

    WeightField wf = make_weight(g, PenalizationKind::gradient_only, opt.lambda_pen, 1.0);
    WeightStepData wdata{&u, &u, &rate, &rate};

    const double mass0 = integral(rho0);
    ScalarField rho = dealias_23(rho0);
    for (int s = 0; s < steps; ++s) {
        rho = heun_step(rho, u, dt);
        wf = evolve_weight(wf, wdata, 0.0, dt);
        double lo = min_value(rho);
        if (!(lo > -1e-10 * std::max(1.0, max_abs(rho))))
            throw NegativeDensityError("transport demo: density undershoot at t = " +
                                       format_double((s + 1) * dt));
    }

    TransportDemoResult out;
    out.steps = steps;
    out.dt = dt;
    out.mass_drift = std::fabs(integral(rho) - mass0) / std::fabs(mass0);
    out.rho_min = min_value(rho);
    out.rho_max = max_value(rho);
    out.w_min = min_value(wf.w);
    out.w_max = max_value(wf.w);

    ChiSpec lin{ChiSpec::Kind::pure_power, 0.0};
    std::vector<double> hs(h_ladder.begin(), h_ladder.end());
    std::vector<double> finals;
    finals.reserve(hs.size());
    for (double h : hs) {
        Kernel k = build_power_kernel(g, h, a);
        TransportDemoRow row;
        row.h = h;
        row.osc_initial = osc_functional(rho0, k, 1.0).value / k.l1;
        row.osc_final = osc_functional(rho, k, 1.0).value / k.l1;
        row.osc_weighted = weighted_osc(rho, wf.w, k, lin, WeightForm::product).value / k.l1;
        out.rows.push_back(row);
        finals.push_back(row.osc_final);
    }
    out.fit = fit_rate(hs, finals, opt.model);
    return out;
}

} // namespace nslab
