#include "nslab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nslab/csv.hpp"
#include "nslab/errors.hpp"
#include "nslab/field_io.hpp"
#include "nslab/kernels.hpp"
#include "nslab/oscillation.hpp"
#include "nslab/threading.hpp"
#include "nslab/weights.hpp"

namespace nslab {

namespace {

VectorField velocity_of(const FluidState& s, double floor) {
    VectorField u(s.rho.grid());
    for (int a = 0; a < s.rho.grid().d; ++a)
        for (std::size_t i = 0; i < s.rho.size(); ++i)
            u[a][i] = s.m[a][i] / std::max(s.rho[i], floor);
    return u;
}

std::string snapshot_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "state_%06zu.nsf", i);
    return buf;
}

void run_level(const ExperimentPlan& plan, const FluidState& init,
               std::span<const double> hs, LevelResult& lr) {
    const SimulationConfig& base = plan.base;
    TorusGrid g = base.make_grid();
    std::filesystem::create_directories(lr.dir);

    SolverConfig scfg = base.make_solver();
    scfg.alpha = lr.alpha;
    RunResult rr = run(init, scfg);
    lr.blew_up = rr.blew_up;
    lr.abort_reason = rr.abort_reason;

    rr.budgets.to_csv(lr.dir + "/budget.csv");
    {
        std::ofstream mf(lr.dir + "/snapshots.csv", std::ios::binary);
        if (!mf) throw RuntimeError("experiment: cannot write " + lr.dir + "/snapshots.csv");
        mf << "index,t,file\n";
        for (std::size_t i = 0; i < rr.trajectory.size(); ++i) {
            std::string name = snapshot_name(i);
            write_state(lr.dir + "/" + name, rr.trajectory[i].rho, rr.trajectory[i].m);
            mf << i << "," << format_double(rr.trajectory[i].t) << "," << name << "\n";
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    lr.osc_norm.assign(hs.size(), nan);
    lr.small_mass.assign(base.diag.lambda_pen.size(),
                         std::vector<double>(base.diag.eta.size(), nan));
    if (rr.blew_up) {
        lr.fit_note = "run aborted: " + lr.abort_reason;
        return;
    }

    const FluidState& fin = rr.trajectory.back();
    for (std::size_t i = 0; i < hs.size(); ++i) {
        Kernel K = build_log_average(g, hs[i], base.diag.a_exp);
        lr.osc_norm[i] = osc_functional(fin.rho, K, base.diag.p).value / K.l1;
    }

    if (rr.trajectory.size() >= 2) {
        PenalizationKind kind = scfg.stress.has_anisotropy() ? PenalizationKind::anisotropic
                                                             : PenalizationKind::isotropic;
        for (std::size_t l = 0; l < base.diag.lambda_pen.size(); ++l) {
            WeightField wf = make_weight(g, kind, base.diag.lambda_pen[l], 1.0,
                                         base.diag.weight_h, base.diag.a_exp);
            VectorField u_prev = velocity_of(rr.trajectory.front(), rr.rho_floor_used);
            ScalarField rate_prev =
                penalization(rr.trajectory.front(), wf, scfg.law, scfg.stress, rr.rho_floor_used);
            for (std::size_t i = 1; i < rr.trajectory.size(); ++i) {
                VectorField u_next = velocity_of(rr.trajectory[i], rr.rho_floor_used);
                ScalarField rate_next =
                    penalization(rr.trajectory[i], wf, scfg.law, scfg.stress, rr.rho_floor_used);
                double dt = rr.trajectory[i].t - rr.trajectory[i - 1].t;
                if (dt > 0.0) {
                    WeightStepData data{&u_prev, &u_next, &rate_prev, &rate_next};
                    wf = evolve_weight(wf, data, lr.alpha, dt);
                }
                u_prev = std::move(u_next);
                rate_prev = std::move(rate_next);
            }
            for (std::size_t e = 0; e < base.diag.eta.size(); ++e)
                lr.small_mass[l][e] = small_weight_mass(fin.rho, wf.w, base.diag.weight_h,
                                                        base.diag.eta[e], base.diag.a_exp);
        }
    }

    if (hs.size() >= 4) {
        try {
            lr.fit = fit_rate(hs, lr.osc_norm, base.diag.model);
        } catch (const std::exception& e) {
            lr.fit_note = std::string("fit failed: ") + e.what();
        }
    } else {
        lr.fit_note = "ladder has under 4 scales, no fit";
    }
}

} // namespace

std::string ExperimentResult::to_text() const {
    std::ostringstream os;
    os << "experiment: levels=" << levels.size() << "\n";
    for (const LevelResult& lr : levels) {
        os << "level " << lr.level << " alpha=" << format_double(lr.alpha);
        if (lr.blew_up) {
            os << " aborted: " << lr.abort_reason << "\n";
            continue;
        }
        os << "\n";
        for (std::size_t i = 0; i < h0s.size(); ++i)
            os << "  h0=" << format_double(h0s[i])
               << " osc_norm=" << format_double(lr.osc_norm[i]) << "\n";
        if (lr.fit) {
            std::istringstream fit_text(lr.fit->to_text());
            std::string line;
            while (std::getline(fit_text, line)) os << "  " << line << "\n";
        } else {
            os << "  " << lr.fit_note << "\n";
        }
    }
    os << "outputs: " << summary_csv << " " << weights_csv << " " << fits_txt << "\n";
    return os.str();
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    if (plan.out_dir.empty()) throw ConfigError("experiment: output directory must be set");
    if (plan.threads < 1) throw ConfigError("experiment: threads must be at least 1");

    const SimulationConfig& base = plan.base;
    FluidState init = base.make_initial(base.exper.seed);
    std::vector<double> hs = base.h_ladder();

    ExperimentResult out;
    out.h0s = hs;
    out.levels.resize(static_cast<std::size_t>(base.exper.levels));
    for (std::size_t j = 0; j < out.levels.size(); ++j) {
        LevelResult& lr = out.levels[j];
        lr.level = static_cast<int>(j);
        lr.alpha = base.exper.alpha0 < 0.0
                       ? base.solver.alpha
                       : base.exper.alpha0 * std::pow(0.25, static_cast<double>(j));
        lr.dir = plan.out_dir + "/alpha_" + std::to_string(j);
    }

    std::filesystem::create_directories(plan.out_dir);
    WorkerPool pool(plan.threads);
    pool.parallel_for(out.levels.size(),
                      [&](std::size_t j) { run_level(plan, init, hs, out.levels[j]); });

    out.summary_csv = plan.out_dir + "/summary.csv";
    out.weights_csv = plan.out_dir + "/weights.csv";
    out.fits_txt = plan.out_dir + "/fits.txt";

    {
        CsvWriter w(out.summary_csv, {"level", "alpha", "h0", "osc_norm"});
        for (const LevelResult& lr : out.levels)
            for (std::size_t i = 0; i < hs.size(); ++i)
                w.row({static_cast<double>(lr.level), lr.alpha, hs[i], lr.osc_norm[i]});
    }
    {
        CsvWriter w(out.weights_csv,
                    {"level", "alpha", "lambda_pen", "eta", "small_weight_mass"});
        for (const LevelResult& lr : out.levels)
            for (std::size_t l = 0; l < base.diag.lambda_pen.size(); ++l)
                for (std::size_t e = 0; e < base.diag.eta.size(); ++e)
                    w.row({static_cast<double>(lr.level), lr.alpha, base.diag.lambda_pen[l],
                           base.diag.eta[e], lr.small_mass[l][e]});
    }
    {
        std::ofstream f(out.fits_txt, std::ios::binary);
        if (!f) throw RuntimeError("experiment: cannot write " + out.fits_txt);
        for (const LevelResult& lr : out.levels) {
            f << "level " << lr.level << " alpha " << format_double(lr.alpha) << "\n";
            if (lr.fit) f << lr.fit->to_text();
            else f << lr.fit_note << "\n";
            f << "\n";
        }
    }
    return out;
}

} // namespace nslab
