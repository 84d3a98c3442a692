#pragma once

#include "nslab/grid.hpp"
#include "nslab/kernels.hpp"

namespace nslab {

/**
 * Result of a kernel-weighted double sum. `value` is the functional itself;
 * `truncation_bound` bounds the mass dropped by skipping shifts where the
 * kernel falls below 1e-12 of its maximum (zero when nothing was skipped,
 * which is the norm for the power kernels: their far plateau sits well
 * above the threshold).
 */
struct OscValue {
    double value = 0.0;
    double truncation_bound = 0.0;
};

// How two weight samples combine in weighted_osc: w(x)+w(y) or w(x)*w(y).
enum class WeightForm { sum, product };

/**
 * Kernel oscillation functional
 *
 *   (1/n^{2d}) sum_s K(s) sum_x |rho(x) - rho(x-s)|^p,
 *
 * the discrete form of the double integral of K(x-y)|rho(x)-rho(y)|^p.
 * Small relative to ||K||_1 exactly when rho has little oscillation at the
 * kernel's scales. Requires p >= 1; rho and the kernel share one grid.
 */
OscValue osc_functional(const ScalarField& rho, const Kernel& kernel, double p);

/**
 * Weight-damped oscillation with a truncation profile chi:
 *
 *   (1/n^{2d}) sum_s K(s) sum_x chi(rho(x) - rho(x-s)) * W(x, x-s),
 *
 * W = w(x)+w(y) (sum form) or w(x)w(y) (product form). The weight must lie
 * in [0,1]. With w identically 1 and chi = |.| the sum form is twice the
 * p = 1 oscillation, the product form equals it.
 */
OscValue weighted_osc(const ScalarField& rho, const ScalarField& w, const Kernel& kernel,
                      const ChiSpec& chi, WeightForm form);

/**
 * Oscillation restricted to pairs where both densities reach eta:
 *
 *   (1/n^{2d}) sum_s K(s) sum_x 1_{rho(x)>=eta} 1_{rho(x-s)>=eta} chi(drho).
 *
 * Nonincreasing in eta (the pair set shrinks). Requires eta > 0.
 */
OscValue thresholded_osc(const ScalarField& rho, const Kernel& kernel, const ChiSpec& chi,
                         double eta);

} // namespace nslab
