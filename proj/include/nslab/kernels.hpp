#pragma once

#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

/**
 * Radial convolution kernels sampled on the torus, used by the oscillation
 * functionals and the mollified penalizations.
 *
 * The profile at scale h is (h + |x|)^(-a) for |x| <= 1/2 (torus distance).
 * Beyond that the scale argument is morphed instead of the value: h is
 * ramped out of it across 1/2 < |x| < 2/3 (so the kernel is h-independent
 * for |x| >= 2/3) and the radius is frozen across 2/3 < |x| < 3/4 (constant
 * (17/24)^(-a) beyond, reachable only in d = 3). Both ramps are C^2, and
 * the h ramp's slope is capped so that |x| |grad K_h| <= (a + 1) K_h holds
 * with margin on ladder scales h <= 1/4 (the comparability constant
 * degrades as h approaches its upper limit). a must exceed the dimension
 * so the scale-normalized mass stays bounded as h -> 0; values are positive
 * everywhere.
 */
struct Kernel {
    ScalarField field; // samples indexed by signed cell offset
    double l1 = 0.0;   // discrete integral (cell volume times sum)
    double h = 0.0;    // scale parameter (h, or h0 for the log average)
    double a_exp = 0.0;

    // Kernel value at a signed cell offset.
    double at_offset(std::span<const int> z) const { return field.at(z); }
};

// The raw profile at scale h.
Kernel build_power_kernel(const TorusGrid& g, double h, double a_exp);

// The same profile normalized to unit discrete mass (l1 == 1).
Kernel build_mollifier(const TorusGrid& g, double h, double a_exp);

/**
 * Scale average int_{h0}^{1} mollifier_h dh/h, evaluated with a 40-point
 * Gauss-Legendre rule in log h. Its mass is |log h0| exactly (each mollifier
 * contributes 1), and it is sandwiched between dimensional multiples of
 * (h0 + |x|)^(-d).
 */
Kernel build_log_average(const TorusGrid& g, double h0, double a_exp);

// Dyadic scale ladder {2^-2, ..., 2^-(log2 n - 2)} used by the diagnostics.
std::vector<double> default_h_ladder(const TorusGrid& g);

/**
 * Concave modulus applied to density differences inside the weighted
 * oscillation functionals.
 *
 * The standard shape is s^2 below 1/2 and s above 1, joined by a smoothstep
 * convex combination; it is C^2, increasing, and satisfies
 * chi(s) <= s chi'(s) <= C chi(s) on s > 0. The power shape s^(1+ell) with
 * ell = 1/(gamma - 1) serves the anisotropic regime.
 */
struct ChiSpec {
    enum class Kind { quad_linear, pure_power };

    Kind kind = Kind::quad_linear;
    double ell = 0.0; // exponent offset for pure_power

    double operator()(double s) const;
    double slope(double s) const; // d chi / ds, one-sided at 0

    static ChiSpec standard();
    static ChiSpec anisotropic(double gamma); // ell = 1/(gamma - 1), gamma > 1
};

// Nodes and weights of the m-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

// Quintic ramp: 0 below 0, 1 above 1, C^2 monotone in between.
inline double smoothstep01(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

} // namespace nslab
