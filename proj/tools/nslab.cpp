// Command-line front end: run experiment families, re-run diagnostics on a
// stored trajectory, check pressure/viscosity hypotheses, and drive the
// linear transport demonstration. Exit codes: 0 success, 1 runtime failure,
// 2 hypothesis failure, 3 numerical blow-up.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nslab/besov.hpp"
#include "nslab/config.hpp"
#include "nslab/csv.hpp"
#include "nslab/errors.hpp"
#include "nslab/experiment.hpp"
#include "nslab/field_io.hpp"
#include "nslab/kernels.hpp"
#include "nslab/oscillation.hpp"
#include "nslab/ratefit.hpp"
#include "nslab/rng.hpp"
#include "nslab/squarefn.hpp"
#include "nslab/transport_demo.hpp"

namespace {

using namespace nslab;

int resolve_threads(int cli_value) {
    if (cli_value > 0) return cli_value;
    if (cli_value < 0) throw ConfigError("threads must be positive");
    const char* env = std::getenv("NSLAB_THREADS");
    if (!env || !*env) return 1;
    try {
        std::size_t pos = 0;
        int v = std::stoi(env, &pos);
        if (pos != std::string(env).size() || v < 1)
            throw ConfigError("NSLAB_THREADS must be a positive integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("NSLAB_THREADS must be a positive integer");
    }
}

HypothesisReport hypothesis_report(const SimulationConfig& cfg) {
    std::optional<AnisotropyInfo> aniso;
    if (cfg.stress.has_anisotropy()) aniso = cfg.stress.info();
    return check_hypotheses(cfg.law, cfg.d, aniso);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads,
            std::optional<unsigned long long> seed, bool force) {
    SimulationConfig cfg = load_config(config_path);
    if (seed) cfg.exper.seed = *seed;

    HypothesisReport report = hypothesis_report(cfg);
    if (!report.all_gating_pass()) {
        std::cerr << report.to_text();
        if (!force) return 2;
        std::cerr << "continuing under --force\n";
    }

    ExperimentPlan plan{cfg, out_dir, threads};
    ExperimentResult result = run_experiment(plan);
    std::cout << result.to_text();

    for (const LevelResult& lr : result.levels)
        if (lr.blew_up) return 3;
    return 0;
}

int cmd_check(const std::string& config_path) {
    SimulationConfig cfg = load_config(config_path);
    HypothesisReport report = hypothesis_report(cfg);
    std::cout << report.to_text();
    return report.all_gating_pass() ? 0 : 2;
}

struct ManifestRow {
    double t = 0.0;
    std::string file;
};

std::vector<ManifestRow> read_manifest(const std::string& dir) {
    std::ifstream is(dir + "/snapshots.csv");
    if (!is) throw RuntimeError("diagnose: cannot open " + dir + "/snapshots.csv");
    std::string line;
    if (!std::getline(is, line) || line != "index,t,file")
        throw RuntimeError("diagnose: " + dir + "/snapshots.csv has an unexpected header");
    std::vector<ManifestRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw RuntimeError("diagnose: malformed manifest row '" + line + "'");
        ManifestRow row;
        row.t = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
        row.file = line.substr(c2 + 1);
        if (row.file.empty()) throw RuntimeError("diagnose: manifest row has no file name");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw RuntimeError("diagnose: empty trajectory in " + dir);
    return rows;
}

FluidState load_snapshot(const std::string& dir, const ManifestRow& row) {
    std::vector<ScalarField> comps = read_fields(dir + "/" + row.file);
    if (comps.empty()) throw RuntimeError("diagnose: empty snapshot " + row.file);
    const TorusGrid& g = comps[0].grid();
    if (comps.size() != static_cast<std::size_t>(g.d) + 1)
        throw RuntimeError("diagnose: snapshot " + row.file + " is not a density+momentum set");
    VectorField m(g);
    for (int a = 0; a < g.d; ++a) m[a] = comps[static_cast<std::size_t>(a) + 1];
    return FluidState(row.t, std::move(comps[0]), std::move(m));
}

int cmd_diagnose(const std::string& dir, const std::string& config_path) {
    SimulationConfig cfg = load_config(config_path);
    std::vector<ManifestRow> manifest = read_manifest(dir);

    std::vector<FluidState> traj;
    traj.reserve(manifest.size());
    for (const ManifestRow& row : manifest) traj.push_back(load_snapshot(dir, row));

    const TorusGrid& g = traj.front().rho.grid();
    for (const FluidState& s : traj)
        if (!(s.rho.grid() == g)) throw RuntimeError("diagnose: snapshots mix grid sizes");

    std::vector<double> hs = cfg.diag.h0.empty() ? default_h_ladder(g) : cfg.diag.h0;
    double floor = cfg.solver.rho_floor > 0.0 ? cfg.solver.rho_floor : 1e-12;
    double eta0 = cfg.diag.eta.front();

    std::string csv_path = dir + "/diagnostics.csv";
    CsvWriter csv(csv_path, {"t", "h0", "osc_mollified", "osc_logavg", "osc_thresholded",
                             "square_fn", "besov_rho", "h1_u"});
    std::ostringstream fits;
    for (const FluidState& s : traj) {
        VectorField u(g);
        for (int a = 0; a < g.d; ++a)
            for (std::size_t i = 0; i < s.rho.size(); ++i)
                u[a][i] = s.m[a][i] / std::max(s.rho[i], floor);

        std::vector<double> sq = square_function_sweep(u, hs, cfg.diag.a_exp);
        double besov_rho = besov_norm(s.rho, 0.0, 2.0, 2.0);
        double h1_u = h1_norm(u);

        std::vector<double> logavg_ladder(hs.size());
        for (std::size_t i = 0; i < hs.size(); ++i) {
            Kernel moll = build_mollifier(g, hs[i], cfg.diag.a_exp);
            Kernel logavg = build_log_average(g, hs[i], cfg.diag.a_exp);
            double osc_m = osc_functional(s.rho, moll, cfg.diag.p).value;
            double osc_l = osc_functional(s.rho, logavg, cfg.diag.p).value / logavg.l1;
            double osc_t =
                thresholded_osc(s.rho, logavg, ChiSpec::standard(), eta0).value / logavg.l1;
            logavg_ladder[i] = osc_l;
            csv.row({s.t, hs[i], osc_m, osc_l, osc_t, sq[i], besov_rho, h1_u});
        }

        if (traj.size() >= 2 && hs.size() >= 4) {
            fits << "t " << format_double(s.t) << "\n";
            try {
                fits << fit_rate(hs, logavg_ladder, cfg.diag.model).to_text();
            } catch (const std::exception& e) {
                fits << "fit failed: " << e.what() << "\n";
            }
            fits << "\n";
        }
    }

    std::string fit_text = fits.str();
    if (fit_text.empty()) {
        std::cout << "diagnostics written to " << csv_path
                  << " (no rate fit: need at least 2 snapshots and 4 ladder scales)\n";
    } else {
        std::ofstream f(dir + "/diagnostics_fits.txt", std::ios::binary);
        f << fit_text;
        std::cout << "diagnostics written to " << csv_path << "\n" << fit_text;
    }
    return 0;
}

int cmd_transport(const std::string& config_path, const std::string& out_dir,
                  std::optional<unsigned long long> seed_opt) {
    SimulationConfig cfg = load_config(config_path);
    unsigned long long seed = seed_opt ? *seed_opt : cfg.exper.seed;

    TorusGrid g = cfg.make_grid();
    Rng rng_u(seed);
    VectorField u = rough_divfree_velocity(g, rng_u, cfg.transport.amplitude);
    Rng rng_rho(seed + 0x9e3779b97f4a7c15ULL); // decorrelated stream, same base seed
    ScalarField rho0 = random_smooth_field(g, rng_rho, cfg.transport.kmax_rho,
                                           cfg.transport.rho_mean, cfg.transport.rho_amp);

    TransportDemoOptions opt;
    opt.t_end = cfg.transport.t_end;
    opt.cfl = cfg.transport.cfl;
    opt.lambda_pen = cfg.transport.lambda_pen;
    opt.a_exp = cfg.diag.a_exp;
    opt.model = cfg.diag.model;

    TransportDemoResult res = linear_transport_demo(u, rho0, cfg.h_ladder(), opt);
    std::cout << res.to_text();

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream txt(out_dir + "/transport.txt", std::ios::binary);
        if (!txt) throw RuntimeError("transport-demo: cannot write to " + out_dir);
        txt << res.to_text();
        CsvWriter csv(out_dir + "/transport.csv",
                      {"h", "osc_initial", "osc_final", "osc_weighted"});
        for (const TransportDemoRow& row : res.rows)
            csv.row({row.h, row.osc_initial, row.osc_final, row.osc_weighted});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral compressible flow workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", diag_dir;
    int threads = 0;
    unsigned long long seed = 0;
    bool force = false;

    CLI::App* c_run = app.add_subcommand("run", "run the configured experiment family");
    c_run->add_option("--config", config_path, "config file")->required();
    c_run->add_option("--out", out_dir, "output directory (default out)");
    c_run->add_option("--threads", threads, "worker threads (env NSLAB_THREADS, default 1)");
    CLI::Option* run_seed = c_run->add_option("--seed", seed, "override the config seed");
    c_run->add_flag("--force", force, "run even when the hypothesis gate fails");

    CLI::App* c_check = app.add_subcommand("check", "print the hypothesis report");
    c_check->add_option("--config", config_path, "config file")->required();

    CLI::App* c_diag = app.add_subcommand("diagnose", "compute diagnostics on a stored trajectory");
    c_diag->add_option("dir", diag_dir, "trajectory directory (snapshots.csv + .nsf files)")
        ->required();
    c_diag->add_option("--config", config_path, "config file")->required();

    CLI::App* c_demo = app.add_subcommand("transport-demo",
                                          "linear transport with a rough stirring velocity");
    c_demo->add_option("--config", config_path, "config file")->required();
    c_demo->add_option("--out", out_dir, "optional output directory for the rate table");
    CLI::Option* demo_seed = c_demo->add_option("--seed", seed, "override the config seed");
    bool demo_out_given = false;

    try {
        app.parse(argc, argv);
        demo_out_given = c_demo->count("--out") > 0;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (c_run->parsed())
            return cmd_run(config_path, out_dir, resolve_threads(threads),
                           run_seed->count() ? std::optional<unsigned long long>(seed)
                                             : std::nullopt,
                           force);
        if (c_check->parsed()) return cmd_check(config_path);
        if (c_diag->parsed()) return cmd_diagnose(diag_dir, config_path);
        if (c_demo->parsed())
            return cmd_transport(config_path, demo_out_given ? out_dir : std::string(),
                                 demo_seed->count() ? std::optional<unsigned long long>(seed)
                                                    : std::nullopt);
    } catch (const HypothesisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BlowUpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
