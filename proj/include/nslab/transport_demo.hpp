#pragma once

#include <span>
#include <string>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/ratefit.hpp"
#include "nslab/rng.hpp"

namespace nslab {

/**
 * Passive-transport rate experiment: a fixed divergence-free velocity stirs
 * a positive density through the spectral continuity equation while a
 * gradient-penalized weight rides along, and the kernel oscillation of the
 * final density is fitted against the scale ladder.
 */

// Stream-function velocities on the 2-torus (d = 2 only), u = (-d_y, d_x) psi.
// The smooth one uses a couple of low modes and is scaled so max |grad u| =
// amplitude. The rough one has a full dyadic cascade |psi_hat(k)| ~ |k|^-3
// with random phases, so each octave feeds grad u comparably; it is scaled so
// the L2 norm of grad u equals amplitude. Both are band-limited to n/3.
VectorField smooth_divfree_velocity(const TorusGrid& g, Rng& rng, double amplitude);
VectorField rough_divfree_velocity(const TorusGrid& g, Rng& rng, double amplitude);

struct TransportDemoOptions {
    double t_end = 0.5;
    double cfl = 0.4;        // dt = cfl / (n max|u|)
    double lambda_pen = 2.0; // weight damping strength (gradient recipe)
    double a_exp = 0.0;      // kernel exponent; <= 0 picks d + 1
    RateModel model = RateModel::inverse_log_power;
};

struct TransportDemoRow {
    double h = 0.0;
    double osc_initial = 0.0;  // oscillation of rho0 around scale h over ||K_h||_1
    double osc_final = 0.0;    // same for rho(t_end)
    double osc_weighted = 0.0; // final, damped by the transported weight (product form)
};

struct TransportDemoResult {
    RateFit fit; // osc_final against the ladder
    std::vector<TransportDemoRow> rows;
    double mass_drift = 0.0; // relative, |m(T) - m(0)| / m(0)
    double rho_min = 0.0, rho_max = 0.0;
    double w_min = 1.0, w_max = 1.0;
    int steps = 0;
    double dt = 0.0;

    std::string to_text() const; // fixed-format rate table plus the fit summary
};

/**
 * Evolves rho0 by d_t rho + div(rho u) = 0 (Heun stages on the dealiased
 * spectral divergence) and a unit initial weight by the damped transport
 * d_t w + u . grad w = -lambda M|grad u| w, then measures the normalized
 * p = 1 oscillation of the final density for every h in the ladder and fits
 * the decay. rho0 must be strictly positive; the ladder must be nonempty.
 */
TransportDemoResult linear_transport_demo(const VectorField& u, const ScalarField& rho0,
                                          std::span<const double> h_ladder,
                                          const TransportDemoOptions& opt = {});

} // namespace nslab
