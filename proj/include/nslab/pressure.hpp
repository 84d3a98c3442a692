#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

enum class PressureKind {
    power,                     // P = a rho^gamma
    van_der_waals_isothermal,  // P = c rho theta/(b - rho) - a rho^2 on [0, b)
    truncated_virial,          // P = rho^gamma + theta sum_n B_n rho^n
    oscillatory_perturbation,  // P = rho^gamma (1 + amp sin(freq rho))
    quasi_monotone_truncation, // base law glued to a monotone power tail
};

/**
 * Equation of state P(rho) with derivative, internal energy, and the growth
 * metadata the hypothesis checker consumes.
 *
 * All built-in laws satisfy P(0) = 0 and are locally Lipschitz on (0, inf);
 * constructors reject parameters that would break that (e.g. a constant
 * virial term). Laws are immutable value objects; evaluation is pure.
 *
 * declared_gamma_tilde defaults to declared_gamma. declared_Pbar = 0 means
 * "measure it": check_hypotheses then reports the sampled supremum of
 * |P'(s)|/s^(gamma_tilde-1) instead of validating against a given constant.
 */
struct PressureLaw {
    PressureKind kind = PressureKind::power;

    double a = 1.0;        // power prefactor / van der Waals attraction
    double b = 0.0;        // van der Waals covolume (pole)
    double c = 0.0;        // van der Waals kinetic prefactor
    double theta = 1.0;    // fixed temperature multiplier
    double osc_amp = 0.5;  // oscillation amplitude, |amp| < 1
    double osc_freq = 0.0; // oscillation frequency in density
    std::vector<double> virial_B; // B_0..B_N, B_0 must vanish

    double trunc_c0 = 0.0; // seam of the quasi-monotone truncation
    double trunc_C = 0.0;  // tail prefactor
    std::shared_ptr<const PressureLaw> base; // wrapped law (truncation only)

    double declared_gamma = 2.0;
    double declared_gamma_tilde = 0.0; // 0: defaults to declared_gamma
    double declared_Pbar = 0.0;        // 0: auto-measured

    // Reference density of the internal energy integral: 0 when P(s)/s^2 is
    // integrable at 0 (power-like laws), otherwise 1.
    double rho_ref = 0.0;

    // Density beyond which s -> P(s)/s is provably nondecreasing
    // (truncation only; 0 for other kinds).
    double rho0_monotone = 0.0;

    static PressureLaw make_power(double a, double gamma);
    static PressureLaw make_van_der_waals(double a, double b, double c, double theta);
    static PressureLaw make_virial(double gamma, double theta, std::vector<double> B);
    static PressureLaw make_oscillatory(double gamma, double amp, double freq);

    double gamma_tilde() const { return declared_gamma_tilde > 0.0 ? declared_gamma_tilde : declared_gamma; }

    // Upper end of the admissible density range (b for van der Waals).
    double admissible_max() const;

    double p(double s) const;       // P(s)
    double dp(double s) const;      // P'(s)
    double energy(double s) const;  // int_{rho_ref}^s P(r)/r^2 dr

    std::string describe() const;
};

ScalarField eval(const PressureLaw& law, const ScalarField& rho);

// validate: checks |P'(rho)| <= declared_Pbar rho^(gamma_tilde - 1) at every
// node and reports the first violation (declared_Pbar must be set).
ScalarField eval_prime(const PressureLaw& law, const ScalarField& rho, bool validate = false);

ScalarField internal_energy(const PressureLaw& law, const ScalarField& rho);

/**
 * Glue a monotone power tail onto the law above c0:
 *   P_eps = P on [0, c0],   P(c0) + C (s - c0)^gamma above.
 * The returned law records rho0_monotone, a density beyond which
 * s -> P_eps(s)/s is nondecreasing (from the tail-dominance estimate).
 */
PressureLaw truncate_quasi_monotone(const PressureLaw& law, double c0, double C);

struct HypothesisEntry {
    std::string name;
    double threshold = 0.0;
    double measured = 0.0;
    bool pass = false;
    bool gates = false; // participates in the run gate for the chosen regime
    std::string note;
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;
    bool all_gating_pass() const {
        for (const auto& e : entries)
            if (e.gates && !e.pass) return false;
        return true;
    }
    const HypothesisEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
    std::string to_text() const;
};

struct AnisotropyInfo {
    double deltaA_norm = 0.0; // sup_t of the spectral norm of deltaA(t)
    double mu = 0.0;
    double lambda = 0.0;
};

/**
 * Checks the growth hypotheses and existence-theorem thresholds for the law
 * in dimension d. The sandwich and derivative-growth constants are measured
 * on a log-spaced density sample in [1e-3, 1e3] (capped below any pole).
 * With anisotropy given, the anisotropic-regime entries gate; otherwise the
 * isotropic ones do.
 */
HypothesisReport check_hypotheses(const PressureLaw& law, int d,
                                  const std::optional<AnisotropyInfo>& aniso = std::nullopt);

// Closed-form thresholds exposed for tests and reporting.
double isotropic_gamma_threshold(double gamma_tilde, int d); // (max(2,gt)+1) d/(d+2)
double anisotropic_gamma_threshold(int d);                   // d/2 [(1+1/d)+sqrt(1+1/d^2)]

} // namespace nslab
