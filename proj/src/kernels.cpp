#include "nslab/kernels.hpp"

#include <cmath>

#include "nslab/errors.hpp"

namespace nslab {
namespace {

double smoothstep_slope(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double u = t * (1.0 - t);
    return 30.0 * u * u;
}

// C^2 ramp 0 -> 1 with wide shoulders: normalized integral of (1-(2t-1)^6)^2.
// Peak slope 91/72, well under the quintic's 15/8; that headroom is what
// keeps |x||grad K| <= (a+1) K when the scale is ramped out below.
double wide_ramp(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double v = 2.0 * t - 1.0;
    const double v2 = v * v, v6 = v2 * v2 * v2;
    const double p = v - (2.0 / 7.0) * v6 * v + (v6 * v6 * v) / 13.0;
    const double nrm = 72.0 / 91.0; // p(1)
    return (p + nrm) / (2.0 * nrm);
}

// Integral of the quintic smoothstep; linear with slope 1 past t = 1.
double smoothstep_mass(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return t - 0.5;
    const double t4 = t * t * t * t;
    return t4 * (2.5 + t * (-3.0 + t));
}

/**
 * Scale argument G(rho, h) of the kernel K = G^(-a).
 *
 * G = h + rho for rho <= 1/2 (the exact profile), then the h term is ramped
 * away across (1/2, 2/3) so every larger radius is h-independent, and the
 * radius itself is frozen across (2/3, 3/4) so the kernel is constant
 * (17/24)^(-a) beyond 3/4. All joins match two derivatives. Blending the
 * scale argument instead of the kernel value keeps |G'| <= max(1, h*91/12 - 1)
 * while G >= rho, which is what bounds |x||grad K| by (a+1) K for ladder
 * scales (h <= 1/4; the constant degrades as h approaches 1/2).
 */
double scale_arg(double rho, double h) {
    if (rho <= 0.5) return h + rho;
    if (rho < 2.0 / 3.0) return rho + h * (1.0 - wide_ramp((rho - 0.5) * 6.0));
    if (rho < 0.75) {
        const double t = (rho - 2.0 / 3.0) * 12.0;
        return 2.0 / 3.0 + (t - smoothstep_mass(t)) / 12.0;
    }
    return 17.0 / 24.0;
}

double profile(double rho, double h, double a) { return std::pow(scale_arg(rho, h), -a); }

} // namespace

Kernel build_power_kernel(const TorusGrid& g, double h, double a_exp) {
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("kernel: scale h must lie in (0, 1]");
    if (!(a_exp > g.d)) throw ConfigError("kernel: exponent must exceed the dimension");
    Kernel k;
    k.h = h;
    k.a_exp = a_exp;
    k.field = ScalarField(g);
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        k.field[lin] = profile(torus_node_radius(g, idx), h, a_exp);
    });
    k.l1 = field_sum(k.field) / static_cast<double>(g.size());
    return k;
}

Kernel build_mollifier(const TorusGrid& g, double h, double a_exp) {
    Kernel k = build_power_kernel(g, h, a_exp);
    const double inv = 1.0 / k.l1;
    for (std::size_t i = 0; i < k.field.size(); ++i) k.field[i] *= inv;
    k.l1 = field_sum(k.field) / static_cast<double>(g.size());
    return k;
}

Kernel build_log_average(const TorusGrid& g, double h0, double a_exp) {
    if (!(h0 > 0.0 && h0 < 1.0)) throw ConfigError("kernel: log average needs 0 < h0 < 1");
    std::vector<double> gx, gw;
    gauss_legendre(40, gx, gw);

    Kernel out;
    out.h = h0;
    out.a_exp = a_exp;
    out.field = ScalarField(g, 0.0);
    const double s0 = std::log(h0); // integrate over s = log h in [s0, 0]
    for (std::size_t q = 0; q < gx.size(); ++q) {
        double s = 0.5 * (s0 + 0.0) + 0.5 * (0.0 - s0) * gx[q];
        double wq = 0.5 * (0.0 - s0) * gw[q];
        Kernel m = build_mollifier(g, std::exp(s), a_exp);
        for (std::size_t i = 0; i < out.field.size(); ++i) out.field[i] += wq * m.field[i];
    }
    out.l1 = field_sum(out.field) / static_cast<double>(g.size());
    return out;
}

std::vector<double> default_h_ladder(const TorusGrid& g) {
    int top = 0;
    for (int m = g.n; m > 1; m /= 2) ++top; // log2 n
    std::vector<double> ladder;
    for (int j = 2; j <= top - 2; ++j) ladder.push_back(std::pow(2.0, -j));
    if (ladder.empty()) ladder.push_back(0.25);
    return ladder;
}

double ChiSpec::operator()(double s) const {
    double t = std::abs(s);
    if (kind == Kind::pure_power) return std::pow(t, 1.0 + ell);
    if (t <= 0.5) return t * t;
    if (t >= 1.0) return t;
    double w = smoothstep01((t - 0.5) * 2.0);
    return (1.0 - w) * t * t + w * t;
}

double ChiSpec::slope(double s) const {
    double t = std::abs(s);
    if (kind == Kind::pure_power) return (1.0 + ell) * std::pow(t, ell);
    if (t <= 0.5) return 2.0 * t;
    if (t >= 1.0) return 1.0;
    double w = smoothstep01((t - 0.5) * 2.0);
    double dw = 2.0 * smoothstep_slope((t - 0.5) * 2.0);
    return (1.0 - w) * 2.0 * t + w + dw * (t - t * t);
}

ChiSpec ChiSpec::standard() { return ChiSpec{Kind::quad_linear, 0.0}; }

ChiSpec ChiSpec::anisotropic(double gamma) {
    if (!(gamma > 1.0)) throw ConfigError("chi: power shape needs gamma > 1");
    return ChiSpec{Kind::pure_power, 1.0 / (gamma - 1.0)};
}

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    if (m < 1) throw ConfigError("gauss_legendre: need at least one node");
    x.assign(static_cast<std::size_t>(m), 0.0);
    w.assign(static_cast<std::size_t>(m), 0.0);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (m + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev estimate of the i-th root.
        double t = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= m; ++j) {
                double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        double wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[static_cast<std::size_t>(i)] = -t;
        x[static_cast<std::size_t>(m - 1 - i)] = t;
        w[static_cast<std::size_t>(i)] = wi;
        w[static_cast<std::size_t>(m - 1 - i)] = wi;
    }
    return;
}

} // namespace nslab
