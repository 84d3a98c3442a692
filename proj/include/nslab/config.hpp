#pragma once

#include <string>
#include <vector>

#include "nslab/pressure.hpp"
#include "nslab/ratefit.hpp"
#include "nslab/solver.hpp"
#include "nslab/stress.hpp"

namespace nslab {

/**
 * Strict flat config: [section] headers, key = value lines, full-line #
 * comments. Unknown sections, unknown keys, duplicate keys, malformed
 * numbers, and pressure keys that the chosen law does not consume are all
 * hard errors; nothing is ignored silently.
 */

struct InitSpec {
    enum class Kind { uniform, acoustic, random } kind = Kind::uniform;
    double rho_mean = 1.0;
    double rho_amp = 0.0;     // density perturbation (acoustic amplitude / random peak)
    double velocity_amp = 0.0;
    int kmax = 3;             // random band limit
    int mode = 1;             // acoustic wavenumber along axis 0
};

struct SolverNumbers {
    double alpha = 0.0;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_every = 0;
    double rho_floor = 0.0;
    bool dealias = true;
    double max_velocity = 1e4;
    double max_density = 1e7;
    int max_substeps = 200000;
};

struct DiagnosticsSpec {
    std::vector<double> h0;        // empty: the grid's default ladder
    double p = 1.0;
    double a_exp = 0.0;            // kernel exponent; <= 0 picks d + 1
    std::vector<double> eta = {1e-2};
    std::vector<double> lambda_pen = {4.0};
    double weight_h = 0.25;        // mollifier scale of the small-weight functional
    RateModel model = RateModel::inverse_log_power;
};

struct TransportSpec {
    double amplitude = 2.0; // rough-velocity H1 seminorm
    double t_end = 0.5;
    double cfl = 0.4;
    double lambda_pen = 2.0;
    int kmax_rho = 1;
    double rho_mean = 1.0;
    double rho_amp = 0.5;
};

struct ExperimentSpec {
    double alpha0 = -1.0; // < 0: use the solver's alpha for every level
    int levels = 1;       // alpha_j = alpha0 4^-j, j = 0..levels-1
    unsigned long long seed = 1;
};

struct SimulationConfig {
    int d = 2;
    int n = 64;
    PressureLaw law;
    AnisotropySpec stress;
    SolverNumbers solver;
    InitSpec init;
    DiagnosticsSpec diag;
    TransportSpec transport;
    ExperimentSpec exper;

    TorusGrid make_grid() const { return TorusGrid(d, n); }
    SolverConfig make_solver() const;
    std::vector<double> h_ladder() const; // diag.h0 or the grid default

    // Deterministic initial state for the configured kind; seed feeds the
    // random draws (unused by the closed-form kinds).
    FluidState make_initial(unsigned long long seed) const;
};

SimulationConfig parse_config_text(const std::string& text);
SimulationConfig load_config(const std::string& path);

} // namespace nslab
