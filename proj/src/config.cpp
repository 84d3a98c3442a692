#include "nslab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nslab/csv.hpp"
#include "nslab/errors.hpp"
#include "nslab/kernels.hpp"
#include "nslab/rng.hpp"

namespace nslab {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    try {
        return parse_double(v);
    } catch (const RuntimeError&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config: key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = v.find(',', start);
        std::string tok = trim(v.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start));
        if (tok.empty())
            throw ConfigError("config: key '" + key + "' has an empty list entry");
        out.push_back(to_real(key, tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

/** One parsed section; reads mark keys consumed so leftovers can be rejected. */
class Section {
public:
    Section() = default;

    void add(const std::string& name, const std::string& key, const std::string& value) {
        if (!kv_.emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + key + "' in [" + name + "]");
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    const std::string* take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return nullptr;
        consumed_.insert(key);
        return &it->second;
    }

    double real(const std::string& key, double fallback) {
        const std::string* v = take(key);
        return v ? to_real(key, *v) : fallback;
    }
    double real_required(const std::string& section, const std::string& key) {
        const std::string* v = take(key);
        if (!v) throw ConfigError("config: [" + section + "] is missing required key '" + key + "'");
        return to_real(key, *v);
    }
    long long integer(const std::string& key, long long fallback) {
        const std::string* v = take(key);
        return v ? to_int(key, *v) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) {
        const std::string* v = take(key);
        return v ? to_bool(key, *v) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const std::string* v = take(key);
        return v ? *v : fallback;
    }
    std::vector<double> list(const std::string& key, std::vector<double> fallback) {
        const std::string* v = take(key);
        return v ? to_list(key, *v) : std::move(fallback);
    }

    void finish(const std::string& name) const {
        for (const auto& [key, value] : kv_)
            if (!consumed_.count(key))
                throw ConfigError("config: unknown key '" + key + "' in [" + name + "]" +
                                  (name == "pressure" ? " (not consumed by this pressure kind)"
                                                      : ""));
    }

private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> consumed_;
};

PressureLaw parse_pressure(Section& s) {
    const std::string* kind = s.take("kind");
    if (!kind) throw ConfigError("config: [pressure] is missing required key 'kind'");

    PressureLaw law;
    if (*kind == "power") {
        double gamma = s.real_required("pressure", "gamma");
        double a = s.real("a", 1.0);
        law = PressureLaw::make_power(a, gamma);
    } else if (*kind == "oscillatory") {
        double gamma = s.real_required("pressure", "gamma");
        double freq = s.real_required("pressure", "freq");
        double amp = s.real("amp", 0.5);
        law = PressureLaw::make_oscillatory(gamma, amp, freq);
    } else if (*kind == "van_der_waals") {
        double b = s.real_required("pressure", "b");
        double c = s.real_required("pressure", "c");
        double a = s.real("a", 1.0);
        double theta = s.real("theta", 1.0);
        law = PressureLaw::make_van_der_waals(a, b, c, theta);
    } else if (*kind == "virial") {
        double gamma = s.real_required("pressure", "gamma");
        double theta = s.real("theta", 1.0);
        const std::string* bs = s.take("virial_b");
        if (!bs) throw ConfigError("config: [pressure] kind 'virial' needs key 'virial_b'");
        law = PressureLaw::make_virial(gamma, theta, to_list("virial_b", *bs));
    } else {
        throw ConfigError("config: unknown pressure kind '" + *kind + "'");
    }

    double gt = s.real("gamma_tilde", 0.0);
    if (gt != 0.0) law.declared_gamma_tilde = gt;
    double pbar = s.real("pbar", 0.0);
    if (pbar != 0.0) law.declared_Pbar = pbar;

    double c0 = s.real("truncate_c0", 0.0);
    double tc = s.real("truncate_C", 0.0);
    if ((c0 > 0.0) != (tc > 0.0))
        throw ConfigError("config: truncate_c0 and truncate_C must be given together");
    if (c0 > 0.0) law = truncate_quasi_monotone(law, c0, tc);
    return law;
}

AnisotropySpec parse_stress(Section& s, int d) {
    double mu = s.real("mu", 1.0);
    double lambda = s.real("lambda", 0.0);
    double eps = s.real("mollifier_eps", 0.05);
    const std::string* da = s.take("deltaA");
    if (!da) {
        AnisotropySpec spec = AnisotropySpec::isotropic(mu, lambda, d);
        spec.mollifier_eps = eps;
        return spec;
    }
    std::vector<double> vals = to_list("deltaA", *da);
    if (vals.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d))
        throw ConfigError("config: deltaA needs d*d entries, row-major");
    SymMatrix m{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            vals[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
    return AnisotropySpec::constant(mu, lambda, d, m, eps);
}

} // namespace

SolverConfig SimulationConfig::make_solver() const {
    SolverConfig cfg;
    cfg.law = law;
    cfg.stress = stress;
    cfg.alpha = solver.alpha;
    cfg.dt = solver.dt;
    cfg.t_end = solver.t_end;
    cfg.rho_floor = solver.rho_floor;
    cfg.dealias = solver.dealias;
    cfg.snapshot_every = solver.snapshot_every;
    cfg.max_velocity = solver.max_velocity;
    cfg.max_density = solver.max_density;
    cfg.max_substeps = solver.max_substeps;
    return cfg;
}

std::vector<double> SimulationConfig::h_ladder() const {
    if (!diag.h0.empty()) return diag.h0;
    return default_h_ladder(make_grid());
}

FluidState SimulationConfig::make_initial(unsigned long long seed) const {
    TorusGrid g = make_grid();
    ScalarField rho(g, init.rho_mean);
    VectorField m(g);

    auto fill_axis_wave = [&](double amp, auto&& writer) {
        const double sp = g.spacing();
        for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
            double x0 = idx[0] * sp;
            writer(lin, amp * std::cos(2.0 * 3.14159265358979323846 * init.mode * x0));
        });
    };

    switch (init.kind) {
    case InitSpec::Kind::uniform: {
        if (init.velocity_amp != 0.0)
            for (std::size_t i = 0; i < m[0].size(); ++i)
                m[0][i] = init.rho_mean * init.velocity_amp;
        break;
    }
    case InitSpec::Kind::acoustic: {
        fill_axis_wave(init.rho_amp, [&](std::size_t lin, double v) { rho[lin] += v; });
        if (init.velocity_amp != 0.0) {
            ScalarField u0(g);
            fill_axis_wave(init.velocity_amp, [&](std::size_t lin, double v) { u0[lin] = v; });
            for (std::size_t i = 0; i < u0.size(); ++i) m[0][i] = rho[i] * u0[i];
        }
        break;
    }
    case InitSpec::Kind::random: {
        Rng rng(seed);
        rho = random_smooth_field(g, rng, init.kmax, init.rho_mean, init.rho_amp);
        if (init.velocity_amp > 0.0) {
            VectorField u = random_smooth_vector(g, rng, init.kmax, init.velocity_amp);
            for (int a = 0; a < g.d; ++a)
                for (std::size_t i = 0; i < rho.size(); ++i) m[a][i] = rho[i] * u[a][i];
        }
        break;
    }
    }
    return FluidState(0.0, std::move(rho), std::move(m));
}

SimulationConfig parse_config_text(const std::string& text) {
    std::map<std::string, Section> sections;
    std::vector<std::string> seen;
    {
        std::istringstream is(text);
        std::string line, current;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw ConfigError("config: malformed section header at line " +
                                      std::to_string(lineno));
                current = trim(t.substr(1, t.size() - 2));
                if (current.empty())
                    throw ConfigError("config: empty section name at line " + std::to_string(lineno));
                if (sections.count(current))
                    throw ConfigError("config: duplicate section [" + current + "]");
                sections[current];
                seen.push_back(current);
                continue;
            }
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config: expected 'key = value' at line " + std::to_string(lineno));
            if (current.empty())
                throw ConfigError("config: key outside any section at line " + std::to_string(lineno));
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config: empty key or value at line " + std::to_string(lineno));
            sections[current].add(current, key, value);
        }
    }

    static const std::set<std::string> known = {"grid",        "pressure",  "stress",
                                                "solver",      "init",      "diagnostics",
                                                "transport",   "experiment"};
    for (const std::string& name : seen)
        if (!known.count(name)) throw ConfigError("config: unknown section [" + name + "]");
    if (!sections.count("grid")) throw ConfigError("config: missing required section [grid]");
    if (!sections.count("pressure")) throw ConfigError("config: missing required section [pressure]");

    SimulationConfig out;

    {
        Section& s = sections["grid"];
        const std::string* dv = s.take("d");
        const std::string* nv = s.take("n");
        if (!dv || !nv) throw ConfigError("config: [grid] needs keys 'd' and 'n'");
        long long d = to_int("d", *dv), n = to_int("n", *nv);
        out.d = static_cast<int>(d);
        out.n = static_cast<int>(n);
        (void)TorusGrid(out.d, out.n); // range validation
        s.finish("grid");
    }

    out.law = parse_pressure(sections["pressure"]);
    sections["pressure"].finish("pressure");

    if (sections.count("stress")) {
        out.stress = parse_stress(sections["stress"], out.d);
        sections["stress"].finish("stress");
    } else {
        out.stress = AnisotropySpec::isotropic(1.0, 0.0, out.d);
    }

    if (sections.count("solver")) {
        Section& s = sections["solver"];
        out.solver.alpha = s.real("alpha", 0.0);
        out.solver.dt = s.real("dt", 1e-3);
        out.solver.t_end = s.real("t_end", 1.0);
        out.solver.snapshot_every = static_cast<int>(s.integer("snapshot_every", 0));
        out.solver.rho_floor = s.real("rho_floor", 0.0);
        out.solver.dealias = s.boolean("dealias", true);
        out.solver.max_velocity = s.real("max_velocity", 1e4);
        out.solver.max_density = s.real("max_density", 1e7);
        out.solver.max_substeps = static_cast<int>(s.integer("max_substeps", 200000));
        if (!(out.solver.dt > 0.0) || !(out.solver.t_end > 0.0))
            throw ConfigError("config: dt and t_end must be positive");
        if (out.solver.alpha < 0.0) throw ConfigError("config: alpha must be nonnegative");
        if (out.solver.snapshot_every < 0)
            throw ConfigError("config: snapshot_every must be nonnegative");
        if (out.solver.max_substeps < 1) throw ConfigError("config: max_substeps must be positive");
        s.finish("solver");
    }

    if (sections.count("init")) {
        Section& s = sections["init"];
        std::string kind = s.text("kind", "uniform");
        if (kind == "uniform") out.init.kind = InitSpec::Kind::uniform;
        else if (kind == "acoustic") out.init.kind = InitSpec::Kind::acoustic;
        else if (kind == "random") out.init.kind = InitSpec::Kind::random;
        else throw ConfigError("config: unknown init kind '" + kind + "'");
        out.init.rho_mean = s.real("rho_mean", 1.0);
        out.init.rho_amp = s.real("rho_amp", 0.0);
        out.init.velocity_amp = s.real("velocity_amp", 0.0);
        out.init.kmax = static_cast<int>(s.integer("kmax", 3));
        out.init.mode = static_cast<int>(s.integer("mode", 1));
        if (!(out.init.rho_mean > 0.0)) throw ConfigError("config: rho_mean must be positive");
        if (out.init.rho_amp < 0.0) throw ConfigError("config: rho_amp must be nonnegative");
        if (out.init.kind != InitSpec::Kind::uniform &&
            out.init.rho_amp >= out.init.rho_mean)
            throw ConfigError("config: rho_amp must stay below rho_mean (positive density)");
        if (out.init.kmax < 1) throw ConfigError("config: kmax must be at least 1");
        if (out.init.mode < 1) throw ConfigError("config: mode must be at least 1");
        s.finish("init");
    }

    if (sections.count("diagnostics")) {
        Section& s = sections["diagnostics"];
        out.diag.h0 = s.list("h0", {});
        out.diag.p = s.real("p", 1.0);
        out.diag.a_exp = s.real("a_exp", 0.0);
        out.diag.eta = s.list("eta", {1e-2});
        out.diag.lambda_pen = s.list("lambda_pen", {4.0});
        out.diag.weight_h = s.real("weight_h", 0.25);
        std::string model = s.text("model", "inverse_log_power");
        if (model == "inverse_log_power") out.diag.model = RateModel::inverse_log_power;
        else if (model == "inverse_power") out.diag.model = RateModel::inverse_power;
        else throw ConfigError("config: unknown rate model '" + model + "'");
        for (double h : out.diag.h0)
            if (!(h > 0.0) || h > 0.5)
                throw ConfigError("config: diagnostics h0 entries must lie in (0, 1/2]");
        if (out.diag.p < 1.0) throw ConfigError("config: diagnostics p must be at least 1");
        for (double e : out.diag.eta)
            if (!(e > 0.0)) throw ConfigError("config: eta entries must be positive");
        for (double l : out.diag.lambda_pen)
            if (!(l > 0.0)) throw ConfigError("config: lambda_pen entries must be positive");
        if (!(out.diag.weight_h > 0.0) || out.diag.weight_h > 1.0)
            throw ConfigError("config: weight_h must lie in (0, 1]");
        s.finish("diagnostics");
    }

    if (sections.count("transport")) {
        Section& s = sections["transport"];
        out.transport.amplitude = s.real("amplitude", 2.0);
        out.transport.t_end = s.real("t_end", 0.5);
        out.transport.cfl = s.real("cfl", 0.4);
        out.transport.lambda_pen = s.real("lambda_pen", 2.0);
        out.transport.kmax_rho = static_cast<int>(s.integer("kmax_rho", 1));
        out.transport.rho_mean = s.real("rho_mean", 1.0);
        out.transport.rho_amp = s.real("rho_amp", 0.5);
        if (!(out.transport.amplitude > 0.0) || !(out.transport.t_end > 0.0) ||
            !(out.transport.cfl > 0.0) || !(out.transport.lambda_pen > 0.0))
            throw ConfigError("config: transport amplitude, t_end, cfl, lambda_pen must be positive");
        if (out.transport.kmax_rho < 1) throw ConfigError("config: kmax_rho must be at least 1");
        if (!(out.transport.rho_mean > 0.0) || out.transport.rho_amp < 0.0 ||
            out.transport.rho_amp >= out.transport.rho_mean)
            throw ConfigError("config: transport density band must stay positive");
        s.finish("transport");
    }

    if (sections.count("experiment")) {
        Section& s = sections["experiment"];
        out.exper.alpha0 = s.real("alpha0", -1.0);
        out.exper.levels = static_cast<int>(s.integer("levels", 1));
        const std::string* sv = s.take("seed");
        if (sv) {
            unsigned long long seed = 0;
            auto [p, ec] = std::from_chars(sv->data(), sv->data() + sv->size(), seed);
            if (ec != std::errc() || p != sv->data() + sv->size())
                throw ConfigError("config: seed expects a nonnegative integer");
            out.exper.seed = seed;
        }
        if (out.exper.levels < 1) throw ConfigError("config: levels must be at least 1");
        if (out.exper.alpha0 == 0.0)
            throw ConfigError("config: alpha0 must be positive (or negative for solver alpha)");
        s.finish("experiment");
    }

    return out;
}

SimulationConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace nslab
