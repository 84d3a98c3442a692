#pragma once

#include <array>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/pressure.hpp"

namespace nslab {

using SymMatrix = std::array<std::array<double, 3>, 3>; // only the d x d corner is used

double sym_spectral_norm(const SymMatrix& m, int d);

/**
 * Viscosity description A(t) = mu Id + deltaA(t) plus the bulk coefficient.
 *
 * deltaA(t) is a piecewise-constant-in-time table of symmetric trace-free
 * d x d matrices (value held from each listed time until the next). The
 * constructor enforces mu > 0, 2 mu + lambda > 0, symmetry and zero trace of
 * every table entry, and the ellipticity margin 2 mu/d + lambda - |deltaA| > 0.
 */
struct AnisotropySpec {
    int d = 2;
    double mu = 1.0;
    double lambda = 0.0;
    double mollifier_eps = 0.05; // Gaussian width of the K_eps smoothing in E
    bool symmetric_form = false; // use div(A D(u)) instead of div(A grad u)

    std::vector<double> times;      // nondecreasing; empty means deltaA = 0
    std::vector<SymMatrix> tables;  // one matrix per time

    double deltaA_norm = 0.0; // sup over the table of the spectral norm

    static AnisotropySpec isotropic(double mu, double lambda, int d = 2);
    static AnisotropySpec with_table(double mu, double lambda, int d,
                                     std::vector<double> times, std::vector<SymMatrix> tables,
                                     double mollifier_eps = 0.05);
    static AnisotropySpec constant(double mu, double lambda, int d, const SymMatrix& deltaA,
                                   double mollifier_eps = 0.05);

    double a_mu() const { return 2.0 * deltaA_norm / (2.0 * mu + lambda); }
    const SymMatrix& deltaA(double t) const;
    bool has_anisotropy() const { return deltaA_norm > 0.0; }

    AnisotropyInfo info() const { return AnisotropyInfo{deltaA_norm, mu, lambda}; }
};

// mu Lap(u) + (lambda + mu) grad div u (the diffusion added to momentum).
VectorField isotropic_apply(const VectorField& u, double mu, double lambda);

// div(A(t) grad u) + (mu + lambda) grad div u with A = mu Id + deltaA(t).
// Cross-derivative terms are dropped on Nyquist planes, where the product
// k_a k_b has no consistent sign on the Hermitian half lattice.
VectorField anisotropic_apply(const VectorField& u, const AnisotropySpec& spec, double t);

// Symmetric-stress variant mu Lap u + (mu+lambda) grad div u + div(deltaA D(u)),
// and its inverse (zero-mean convention), solved per frequency as a d x d
// linear system. The variant is opt-in; the time integrator does not use it.
VectorField symmetric_anisotropic_apply(const VectorField& u, const AnisotropySpec& spec, double t);
VectorField symmetric_anisotropic_invert(const VectorField& rhs, const AnisotropySpec& spec, double t);

/**
 * Exact integrating factor exp(dt L) of the momentum diffusion operator
 * L u = div(A(t) grad u) + (mu + lambda) grad div u, applied in place to the
 * spectral momentum components. Per mode the symbol splits into a scalar part
 * and a rank-one grad-div part that commute, so the exponential is closed
 * form. Uses the table entry at time t throughout the interval.
 */
void apply_viscous_exponential(std::vector<SpectralField>& mhat, const AnisotropySpec& spec,
                               double t, double dt);

/**
 * The nonlocal scalar operator A_mu = (Lap - a_mu E)^{-1} E where
 *   E s = -div( deltaA(t)/(2 |deltaA|) grad (K_eps * s) ),
 * realized as the Fourier multiplier e(xi)/(-|xi|^2 - a_mu e(xi)) with
 *   e(xi) = (xi . (deltaA/2|deltaA|) xi) exp(-eps^2 |xi|^2 / 2),  xi = 2 pi k,
 * and value 0 at xi = 0. Throws if the denominator comes within 1e-8 of zero
 * anywhere on the lattice (resonance report).
 */
ScalarField amu_apply(const ScalarField& f, const AnisotropySpec& spec, double t);

// Exact lattice extrema of the two governing symbols, used as preflight
// checks: |A_mu symbol| must stay <= 1 (a_mu <= 1/2 guarantees it), and the
// |(Lap - a_mu E)^{-1} Lap| symbol stays <= 1/(1 - a_mu).
double amu_symbol_max(const TorusGrid& g, const AnisotropySpec& spec, double t);
double inv_shifted_laplacian_symbol_max(const TorusGrid& g, const AnisotropySpec& spec, double t);

// Runs both symbol checks for every table entry; throws HypothesisError on
// violation. Called before a run starts.
void preflight_symbol_checks(const TorusGrid& g, const AnisotropySpec& spec);

/**
 * Residual of the compensated-divergence relation on two consecutive states:
 *
 *   (2mu+lambda) div u = [P - mean P] + a_mu A_mu P
 *                        + Inv div(d_t m + div(m x u)) + Inv div(alpha grad rho . grad u - rho f)
 *
 * with Inv = (Lap - a_mu E)^{-1} under the zero-mean convention. Fields are
 * evaluated at the time midpoint; d_t m is the two-point difference. The
 * pressure mean (the constant the inversion cannot see) is returned apart.
 */
struct DivuResidual {
    ScalarField residual;
    double pressure_mean = 0.0;
};

DivuResidual divu_relation_residual(const ScalarField& rho_prev, const VectorField& m_prev,
                                    const ScalarField& rho_next, const VectorField& m_next,
                                    double t_mid, double dt,
                                    const PressureLaw& law, const AnisotropySpec& spec,
                                    double alpha = 0.0, double rho_floor = 1e-12,
                                    const VectorField* forcing = nullptr);

} // namespace nslab
