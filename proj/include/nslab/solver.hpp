#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/pressure.hpp"
#include "nslab/stress.hpp"

namespace nslab {

/** One snapshot of the flow: density and momentum m = rho u at time t. */
struct FluidState {
    double t = 0.0;
    ScalarField rho;
    VectorField m;

    FluidState() = default;
    FluidState(double time, ScalarField density, VectorField momentum);
};

using ForcingFn = std::function<VectorField(double t, const TorusGrid& g)>;

struct SolverConfig {
    PressureLaw law;
    AnisotropySpec stress;   // mu, lambda and the deltaA(t) table
    double alpha = 0.0;      // diffusion coefficient in the continuity equation
    ForcingFn forcing;       // empty: f = 0
    double dt = 1e-3;        // outer step; subdivided further when stability asks
    double t_end = 1.0;
    double rho_floor = 0.0;  // velocity u = m/max(rho, rho_floor); <= 0 picks 1e-8 max rho0
    bool dealias = true;     // 2/3-rule filter on the state after each stage
    int snapshot_every = 0;  // keep a snapshot every this many outer steps; 0: ends only
    double max_velocity = 1e4; // blow-up caps
    double max_density = 1e7;
    int max_substeps = 200000; // per outer step, before declaring collapse
};

/**
 * Per-step budget rows: mass, kinetic and potential energy, the running
 * time integral of mu |grad u|^2 + (lambda+mu) (div u)^2 (trapezoid in time),
 * and the extra-integrability integral of rho^(gamma+a), a = 2 gamma/d - 1.
 */
struct BudgetSeries {
    std::vector<double> t, mass, ekin, epot, diss, rho_gamma_a;
    double integrability_exponent = 0.0; // the gamma + a actually used

    std::size_t size() const { return t.size(); }
    void append(double time, double mass_v, double ekin_v, double epot_v,
                double diss_v, double rho_v);
    void to_csv(const std::string& path) const; // columns t, mass, ekin, epot, diss, rho_gamma_a
};

struct BudgetSample {
    double mass = 0.0;
    double ekin = 0.0;
    double epot = 0.0;
    double diss_rate = 0.0; // instantaneous integral, before time integration
    double rho_gamma_a = 0.0;
};

BudgetSample measure_budget(const FluidState& s, const SolverConfig& cfg);

struct RunResult {
    std::vector<FluidState> trajectory; // initial state, sampled snapshots, final state
    BudgetSeries budgets;
    bool blew_up = false;
    std::string abort_reason;    // empty unless blew_up
    double rho_floor_used = 0.0; // the resolved velocity floor, reported
};

/**
 * Advance by cfg.dt with one or more stability-limited substeps. Each substep
 * integrates the diffusion exactly in Fourier space (continuity: exp(alpha dt
 * Lap); momentum: the viscous symbol exponential) and the transport, pressure,
 * forcing and correction terms with a two-stage strong-stability scheme on
 * top of that integrating factor. Quadratic products are kept clean by
 * filtering the state after every stage when cfg.dealias is set.
 *
 * Throws BlowUpError when velocity/density caps are hit or the stable step
 * collapses, NegativeDensityError when an undershoot exceeds 1e-10 max rho.
 */
FluidState step(const FluidState& state, const SolverConfig& cfg);

/**
 * Advance to cfg.t_end collecting snapshots and budget rows (one per outer
 * step). Validates initial data (rho >= 0, finite, away from any pressure
 * pole) and runs the spectral preflight checks for the anisotropy. A blow-up
 * mid-run is caught: the partial trajectory and budgets are returned with
 * blew_up set and the reason recorded.
 */
RunResult run(const FluidState& initial, const SolverConfig& cfg);

/**
 * The compensated momentum-flux potential of two consecutive snapshots:
 *   inverse_laplacian_zero_mean( div( d_t m + div(m x u) ) )
 * with d_t m the two-point difference and the flux tensor evaluated on the
 * midpoint fields (u = m/max(rho, rho_floor)).
 */
ScalarField effective_flux(const FluidState& prev, const FluidState& next,
                           double rho_floor = 1e-12);

} // namespace nslab
