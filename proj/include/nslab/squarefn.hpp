#pragma once

#include "nslab/grid.hpp"

namespace nslab {

// sqrt( sum_a ||u_a||_2^2 + sum_{a,b} ||d_b u_a||_2^2 ), unit torus volume.
double h1_norm(const VectorField& u);

/**
 * Shift-difference square functional
 *
 *   int_{h0}^{1} int K_mean_h(z) || S_{|z|}(x) - S_{|z|}(x+z) ||_{L^2_x} dz dh/h,
 *
 * where S_r = (1/r) int_{|y|<=r} |grad u|(x+y) / |y|^{d-1} dy is the scaled
 * shell average of the velocity gradient at radius r and K_mean_h the unit
 * mass kernel at scale h. Evaluated by grouping lattice shifts z by radius:
 * one FFT autocorrelation per distinct radius yields every shift norm of
 * that radius at once; the h integral uses the same 40-point log-scale
 * quadrature as the kernel scale average. Grows like |log h0|^{1/2} times
 * the H^1 norm of u. a_exp <= 0 selects the default kernel exponent d + 1.
 */
double square_function_shift(const VectorField& u, double h0, double a_exp = 0.0);

// Same functional across a whole h0 ladder. The shift-norm table does not
// depend on h0, so one table serves every rung; results match the scalar
// call exactly.
std::vector<double> square_function_sweep(const VectorField& u, std::span<const double> h0s,
                                          double a_exp = 0.0);

} // namespace nslab
