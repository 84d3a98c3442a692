#include "nslab/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nslab/maximal.hpp"
#include "nslab/spectral.hpp"

namespace nslab {
namespace {

void check_weight(const WeightField& wf) {
    if (!(wf.lambda_pen > 0.0)) throw ConfigError("weight: lambda must be positive");
    if (!(wf.h_pen > 0.0)) throw ConfigError("weight: mollifier scale must be positive");
    for (double v : wf.w.values())
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("weight: values must lie in [0, 1]");
}

ScalarField clamp01(ScalarField f) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::min(1.0, std::max(0.0, f[i]));
    return f;
}

ScalarField diffuse(const ScalarField& f, double tau) {
    const double pi2 = 4.0 * 3.14159265358979323846 * 3.14159265358979323846;
    return apply_multiplier(f, [&](std::span<const int> k) {
        double k2 = 0.0;
        for (int a = 0; a < static_cast<int>(k.size()); ++a)
            k2 += static_cast<double>(k[a]) * k[a];
        return std::complex<double>(std::exp(-pi2 * k2 * tau), 0.0);
    });
}

struct AxisStencil {
    int idx[4];   // wrapped node indices of the 4-point stencil
    double cw[4]; // Catmull-Rom weights at the fractional position
    int lo, hi;   // the two inner nodes, for range clipping
};

AxisStencil axis_stencil(double x, int n) {
    double t = x * n;
    t -= std::floor(t / n) * n; // into [0, n)
    int i = static_cast<int>(std::floor(t));
    if (i >= n) i = n - 1; // guards t == n after rounding
    double fr = t - i;
    AxisStencil s;
    for (int j = 0; j < 4; ++j) {
        int m = (i - 1 + j) % n;
        if (m < 0) m += n;
        s.idx[j] = m;
    }
    const double f2 = fr * fr, f3 = f2 * fr;
    s.cw[0] = -0.5 * f3 + f2 - 0.5 * fr;
    s.cw[1] = 1.5 * f3 - 2.5 * f2 + 1.0;
    s.cw[2] = -1.5 * f3 + 2.0 * f2 + 0.5 * fr;
    s.cw[3] = 0.5 * f3 - 0.5 * f2;
    s.lo = s.idx[1];
    s.hi = s.idx[2];
    return s;
}

double cubic_impl(const ScalarField& f, std::span<const double> x, bool clip) {
    const TorusGrid& g = f.grid();
    const int n = g.n;
    AxisStencil s[3];
    for (int a = 0; a < g.d; ++a) s[a] = axis_stencil(x[static_cast<std::size_t>(a)], n);

    double acc = 0.0;
    double lo = 0.0, hi = 0.0;
    if (g.d == 1) {
        for (int j = 0; j < 4; ++j) acc += s[0].cw[j] * f[static_cast<std::size_t>(s[0].idx[j])];
        lo = std::min(f[static_cast<std::size_t>(s[0].lo)], f[static_cast<std::size_t>(s[0].hi)]);
        hi = std::max(f[static_cast<std::size_t>(s[0].lo)], f[static_cast<std::size_t>(s[0].hi)]);
    } else if (g.d == 2) {
        for (int j0 = 0; j0 < 4; ++j0) {
            std::size_t row = static_cast<std::size_t>(s[0].idx[j0]) * n;
            double line = 0.0;
            for (int j1 = 0; j1 < 4; ++j1) line += s[1].cw[j1] * f[row + static_cast<std::size_t>(s[1].idx[j1])];
            acc += s[0].cw[j0] * line;
        }
        lo = hi = f[static_cast<std::size_t>(s[0].lo) * n + static_cast<std::size_t>(s[1].lo)];
        for (int c0 : {s[0].lo, s[0].hi})
            for (int c1 : {s[1].lo, s[1].hi}) {
                double v = f[static_cast<std::size_t>(c0) * n + static_cast<std::size_t>(c1)];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    } else {
        const std::size_t nn = static_cast<std::size_t>(n) * n;
        for (int j0 = 0; j0 < 4; ++j0) {
            std::size_t p0 = static_cast<std::size_t>(s[0].idx[j0]) * nn;
            double plane = 0.0;
            for (int j1 = 0; j1 < 4; ++j1) {
                std::size_t p1 = p0 + static_cast<std::size_t>(s[1].idx[j1]) * n;
                double line = 0.0;
                for (int j2 = 0; j2 < 4; ++j2) line += s[2].cw[j2] * f[p1 + static_cast<std::size_t>(s[2].idx[j2])];
                plane += s[1].cw[j1] * line;
            }
            acc += s[0].cw[j0] * plane;
        }
        lo = hi = f[static_cast<std::size_t>(s[0].lo) * nn + static_cast<std::size_t>(s[1].lo) * n + static_cast<std::size_t>(s[2].lo)];
        for (int c0 : {s[0].lo, s[0].hi})
            for (int c1 : {s[1].lo, s[1].hi})
                for (int c2 : {s[2].lo, s[2].hi}) {
                    double v = f[static_cast<std::size_t>(c0) * nn + static_cast<std::size_t>(c1) * n + static_cast<std::size_t>(c2)];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
    }
    if (clip) acc = std::min(hi, std::max(lo, acc));
    return acc;
}

} // namespace

double sample_cubic(const ScalarField& f, std::span<const double> x) {
    return cubic_impl(f, x, false);
}

double sample_clipped_cubic(const ScalarField& f, std::span<const double> x) {
    return cubic_impl(f, x, true);
}

WeightField make_weight(const TorusGrid& g, PenalizationKind kind, double lambda_pen,
                        double w0, double h_pen, double a_exp) {
    WeightField wf;
    wf.w = ScalarField(g, w0);
    wf.kind = kind;
    wf.lambda_pen = lambda_pen;
    wf.h_pen = h_pen;
    wf.a_exp = a_exp;
    check_weight(wf);
    return wf;
}

ScalarField penalization(const FluidState& s, const WeightField& wf, const PressureLaw& law,
                         const AnisotropySpec& stress, double rho_floor) {
    const TorusGrid& g = s.rho.grid();
    if (!(rho_floor > 0.0)) throw ConfigError("penalization: rho_floor must be positive");
    if (stress.d != g.d) throw ConfigError("penalization: stress dimension mismatch");
    if (!(wf.lambda_pen > 0.0)) throw ConfigError("weight: lambda must be positive");

    VectorField u(g);
    for (int a = 0; a < g.d; ++a)
        for (std::size_t i = 0; i < u[a].size(); ++i)
            u[a][i] = s.m[a][i] / std::max(s.rho[i], rho_floor);

    ScalarField out = maximal_function(gradient_magnitude(u));
    const double lam = wf.lambda_pen;
    if (wf.kind == PenalizationKind::gradient_only) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= lam;
        return out;
    }
    ScalarField divu = divergence(u);
    if (wf.kind == PenalizationKind::isotropic) {
        const double gt = law.gamma_tilde();
        for (std::size_t i = 0; i < out.size(); ++i) {
            double ad = std::abs(divu[i]);
            double rho = std::max(s.rho[i], 0.0);
            out[i] = lam * (rho * ad + ad + out[i] + std::pow(rho, gt));
        }
        return out;
    }
    // anisotropic: mollified compression plus the nonlocal pressure image
    ScalarField inner(g);
    ScalarField rg(g);
    for (std::size_t i = 0; i < rg.size(); ++i)
        rg[i] = std::pow(std::max(s.rho[i], 0.0), law.declared_gamma);
    ScalarField arho = amu_apply(rg, stress, s.t);
    for (std::size_t i = 0; i < inner.size(); ++i)
        inner[i] = std::abs(divu[i]) + std::abs(arho[i]);
    double a = wf.a_exp > 0.0 ? wf.a_exp : g.d + 1.0;
    Kernel kb = build_mollifier(g, wf.h_pen, a);
    ScalarField moll = convolve(inner, kb.field);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = lam * (out[i] + std::max(moll[i], 0.0));
    return out;
}

WeightField evolve_weight(const WeightField& wf, const WeightStepData& in, double alpha, double dt) {
    check_weight(wf);
    if (!(dt > 0.0)) throw ConfigError("evolve_weight: dt must be positive");
    if (!in.u_begin || !in.u_end || !in.rate_begin || !in.rate_end)
        throw ConfigError("evolve_weight: missing endpoint fields");
    const TorusGrid& g = wf.w.grid();
    if (!(in.u_begin->grid() == g) || !(in.u_end->grid() == g) ||
        !(in.rate_begin->grid() == g) || !(in.rate_end->grid() == g))
        throw ConfigError("evolve_weight: grid mismatch");
    if (alpha < 0.0) throw ConfigError("evolve_weight: alpha must be nonnegative");

    ScalarField w = wf.w;
    if (alpha > 0.0) w = clamp01(diffuse(w, 0.5 * alpha * dt));

    VectorField umid(g);
    for (int a = 0; a < g.d; ++a)
        for (std::size_t i = 0; i < umid[a].size(); ++i)
            umid[a][i] = 0.5 * ((*in.u_begin)[a][i] + (*in.u_end)[a][i]);

    const double sp = g.spacing();
    ScalarField out(g);
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        std::array<double, 3> x{0.0, 0.0, 0.0}, x1{0.0, 0.0, 0.0}, X{0.0, 0.0, 0.0};
        for (int a = 0; a < g.d; ++a) {
            x[static_cast<std::size_t>(a)] = idx[a] * sp;
            x1[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] - 0.5 * dt * (*in.u_end)[a][lin];
        }
        std::span<const double> x1s(x1.data(), static_cast<std::size_t>(g.d));
        for (int a = 0; a < g.d; ++a)
            X[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] - dt * sample_cubic(umid[a], x1s);
        std::span<const double> Xs(X.data(), static_cast<std::size_t>(g.d));
        double wv = sample_clipped_cubic(w, Xs);
        double rate = 0.5 * (sample_clipped_cubic(*in.rate_begin, Xs) + (*in.rate_end)[lin]);
        out[lin] = wv * std::exp(-dt * rate);
    });
    out = clamp01(std::move(out));
    if (alpha > 0.0) out = clamp01(diffuse(out, 0.5 * alpha * dt));

    WeightField next = wf;
    next.w = std::move(out);
    return next;
}

double log_moment(const ScalarField& rho, const ScalarField& w, double theta) {
    if (!(rho.grid() == w.grid())) throw ConfigError("log_moment: grid mismatch");
    if (!(theta >= 0.0)) throw ConfigError("log_moment: theta must be nonnegative");
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double lw = std::log(std::max(w[i], 1e-300));
        s += rho[i] * std::pow(1.0 + std::abs(lw), theta);
    }
    return s / static_cast<double>(rho.size());
}

double small_weight_mass(const ScalarField& rho, const ScalarField& w, double h, double eta,
                         double a_exp) {
    if (!(rho.grid() == w.grid())) throw ConfigError("small_weight_mass: grid mismatch");
    if (!(eta > 0.0)) throw ConfigError("small_weight_mass: eta must be positive");
    const TorusGrid& g = rho.grid();
    double a = a_exp > 0.0 ? a_exp : g.d + 1.0;
    Kernel kb = build_mollifier(g, h, a);
    ScalarField moll = convolve(w, kb.field);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (moll[i] <= eta) s += rho[i];
    return s / static_cast<double>(rho.size());
}

} // namespace nslab
