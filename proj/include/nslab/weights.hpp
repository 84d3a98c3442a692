#pragma once

#include "nslab/grid.hpp"
#include "nslab/kernels.hpp"
#include "nslab/pressure.hpp"
#include "nslab/solver.hpp"
#include "nslab/stress.hpp"

namespace nslab {

/**
 * Damping-rate recipes for the transported weights.
 *
 *   gradient_only  lambda M|grad u|
 *   isotropic      lambda (rho |div u| + |div u| + M|grad u| + rho^gamma_tilde)
 *   anisotropic    lambda (M|grad u| + mollifier_h * (|div u| + |A rho^gamma|))
 *
 * where A is the zero-order nonlocal operator of the anisotropic stress
 * (amu_apply); with no anisotropy that term vanishes and the last recipe
 * degenerates to the mollified compression rate. The pressure-inhomogeneity
 * terms of the full recipe are zero for the x-independent laws built here.
 */
enum class PenalizationKind { gradient_only, isotropic, anisotropic };

/** A transported damping weight, pointwise in [0, 1]. */
struct WeightField {
    ScalarField w;
    PenalizationKind kind = PenalizationKind::gradient_only;
    double lambda_pen = 4.0;
    double h_pen = 0.25; // mollifier scale of the anisotropic recipe
    double a_exp = 0.0;  // kernel exponent; <= 0 picks d + 1
};

// Constant initial weight w0 in [0, 1]; lambda_pen must be positive.
WeightField make_weight(const TorusGrid& g, PenalizationKind kind, double lambda_pen,
                        double w0, double h_pen = 0.25, double a_exp = 0.0);

// The damping rate D >= 0 for the weight's recipe, evaluated on a flow
// snapshot (velocity u = m / max(rho, rho_floor)).
ScalarField penalization(const FluidState& s, const WeightField& wf, const PressureLaw& law,
                         const AnisotropySpec& stress, double rho_floor = 1e-12);

/** Endpoint fields of one weight step over [t, t + dt]. */
struct WeightStepData {
    const VectorField* u_begin = nullptr;
    const VectorField* u_end = nullptr;
    const ScalarField* rate_begin = nullptr;
    const ScalarField* rate_end = nullptr;
};

/**
 * One semi-Lagrangian step of  d_t w + u . grad w = -D w  (+ alpha Lap w
 * when alpha > 0, by Strang splitting with the exact spectral half-steps).
 *
 * Characteristics are traced backward with a second-order midpoint rule; w
 * and the departure-point rate are read with periodic cubic interpolation
 * clipped to the local cell range, so 0 <= w <= 1 survives exactly and a
 * pointwise ordering of two weights under the same (u, D) is preserved on
 * smooth data. The decay integral uses the trapezoid along the path.
 */
WeightField evolve_weight(const WeightField& w, const WeightStepData& in, double alpha, double dt);

// int rho (1 + |log(max(w, 1e-300))|)^theta dx; w == 1 gives the mass,
// w == exp(-1) with theta = 1 gives twice the mass.
double log_moment(const ScalarField& rho, const ScalarField& w, double theta);

// Mass of the small-weight region: int rho 1_{(mollifier_h * w) <= eta} dx.
double small_weight_mass(const ScalarField& rho, const ScalarField& w, double h, double eta,
                         double a_exp = 0.0);

// Periodic tensor Catmull-Rom at a physical point x in [0,1)^d, plain and
// clipped to the surrounding cell's value range; exposed for the tests.
double sample_cubic(const ScalarField& f, std::span<const double> x);
double sample_clipped_cubic(const ScalarField& f, std::span<const double> x);

} // namespace nslab
