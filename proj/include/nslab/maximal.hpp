#pragma once

#include <vector>

#include "nslab/grid.hpp"
#include "nslab/rng.hpp"

namespace nslab {

/**
 * Discrete Hardy-Littlewood maximal operator and the averaged radial
 * gradient functional built on top of it.
 *
 * Ball averages use the lattice metric: a node at signed cell offset z
 * belongs to the ball of radius r when |z|^2 h^2 <= r^2 + 1e-15, h the grid
 * spacing (the epsilon keeps exact-radius cells inside despite rounding).
 * The radius ladder is dyadic, {h, 2h, 4h, ..., 1/2}, plus the degenerate
 * single-cell ball, so M f >= |f| pointwise.
 *
 * Averages are accumulated shell by shell as plain sums, so on integer-valued
 * fields every average is exact and M agrees bit-for-bit with a brute-force
 * evaluation.
 */

// Dyadic ball radii {h, 2h, ..., 1/2} in physical units (h = 1/n).
std::vector<double> maximal_radius_ladder(const TorusGrid& g);

// Mean of |f| over the lattice ball of radius r centered at each node.
ScalarField ball_average(const ScalarField& f, double r);

// M f = max over the radius ladder (and the degenerate cell) of ball
// averages of |f|.
ScalarField maximal_function(const ScalarField& f);

/**
 * Averaged radial gradient functional
 *   (D_h g)(x) = (1/h) int_{|z| <= h} g(x + z) / |z|^(d-1) dz
 * evaluated by FFT convolution against a kernel tabulated per cell with a
 * tensor Gauss-Legendre rule (16 points in d = 1, 4x4 in d = 2, 4^3 in
 * d = 3); the rule both resolves the |z|^(1-d) singularity at the origin
 * and weights cells cut by the ball boundary with their covered fraction.
 * For constant g the closed forms are 2g (d = 1) and 2 pi g (d = 2).
 */
ScalarField dh_operator(const ScalarField& g, double h);

// Pointwise Frobenius norm of the spectral gradient: sqrt(sum_ab (d_b u_a)^2).
ScalarField gradient_magnitude(const VectorField& u);
ScalarField gradient_magnitude(const ScalarField& f);

/**
 * Measured constant of the pointwise Morrey-type inequality
 *   |f(x) - f(y)| <= C |x - y| (M|grad f|(x) + M|grad f|(y)):
 * the largest ratio over npairs random node pairs. Finite-dimensional
 * surrogate for the Lipschitz constant of f relative to M|grad f|; the
 * weight-penalization default lambda = 4 (1 + C) consumes it.
 */
double maximal_inequality_constant(const ScalarField& f, Rng& rng, int npairs = 256);

} // namespace nslab
