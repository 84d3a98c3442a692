#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nslab/config.hpp"
#include "nslab/ratefit.hpp"

namespace nslab {

struct ExperimentPlan {
    SimulationConfig base;
    std::string out_dir;
    int threads = 1;
};

/** Everything measured for one diffusion level. */
struct LevelResult {
    int level = 0;
    double alpha = 0.0;
    bool blew_up = false;
    std::string abort_reason;
    std::vector<double> osc_norm;                // per ladder scale, NaN if aborted
    std::vector<std::vector<double>> small_mass; // [lambda_pen index][eta index]
    std::optional<RateFit> fit;
    std::string fit_note; // why the fit is absent, when it is
    std::string dir;      // this level's output directory
};

/**
 * A family of runs sharing one initial state, one per diffusion level
 * alpha_j = alpha0 / 4^j (alpha0 < 0 reuses the solver's alpha everywhere).
 * Levels are independent jobs: each writes budget.csv, a snapshots.csv
 * manifest and the binary states into out_dir/alpha_<j>/, then measures the
 * oscillation ladder and the small-weight masses on its final state. The
 * aggregate files are written after all levels finish, in level order, so
 * output bytes do not depend on the worker count.
 */
struct ExperimentResult {
    std::vector<double> h0s;
    std::vector<LevelResult> levels;
    std::string summary_csv, weights_csv, fits_txt;

    std::string to_text() const;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

} // namespace nslab
