#include "nslab/solver.hpp"

#include <cmath>
#include <utility>

#include "nslab/csv.hpp"
#include "nslab/fft.hpp"
#include "nslab/spectral.hpp"

namespace nslab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Fields {
    ScalarField rho;
    VectorField m;
};

void validate_cfg(const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("solver: dt must be positive");
    if (cfg.alpha < 0.0) throw ConfigError("solver: alpha must be nonnegative");
    if (cfg.snapshot_every < 0) throw ConfigError("solver: snapshot_every must be nonnegative");
    if (!(cfg.max_velocity > 0.0) || !(cfg.max_density > 0.0))
        throw ConfigError("solver: blow-up caps must be positive");
    if (cfg.max_substeps < 1) throw ConfigError("solver: max_substeps must be at least 1");
}

double resolve_floor(const SolverConfig& cfg, const ScalarField& rho) {
    if (cfg.rho_floor > 0.0) return cfg.rho_floor;
    double mx = max_value(rho);
    return mx > 0.0 ? 1e-8 * mx : 1e-8;
}

// rho >= -1e-10 max rho is tolerated and clamped to zero; anything deeper is
// a genuine undershoot and aborts the run.
void clip_negatives(ScalarField& rho, const char* where) {
    double mx = 0.0, mn = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        mx = std::max(mx, rho[i]);
        mn = std::min(mn, rho[i]);
    }
    if (mn >= 0.0) return;
    if (mn < -1e-10 * std::max(mx, 1e-300))
        throw NegativeDensityError(std::string(where) + ": density undershoot " +
                                   std::to_string(mn) + " exceeds the clipping tolerance");
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::max(rho[i], 0.0);
}

struct Gauge {
    double vmax = 0.0;   // max |u|
    double cs2max = 0.0; // max P'(rho), clamped below at 0
    double maxdev = 0.0; // max |1/max(rho,floor) - 1|, scale of the explicit diffusion
};

Gauge inspect(const Fields& y, const SolverConfig& cfg, double floor, const char* where) {
    const int d = y.m.dim();
    Gauge ga;
    double rho_max = 0.0;
    for (std::size_t i = 0; i < y.rho.size(); ++i) {
        double r = y.rho[i];
        if (!std::isfinite(r)) throw BlowUpError(std::string(where) + ": non-finite density");
        rho_max = std::max(rho_max, r);
        double rr = std::max(r, floor);
        double v2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double mv = y.m[a][i];
            if (!std::isfinite(mv)) throw BlowUpError(std::string(where) + ": non-finite momentum");
            v2 += (mv / rr) * (mv / rr);
        }
        ga.vmax = std::max(ga.vmax, std::sqrt(v2));
        ga.maxdev = std::max(ga.maxdev, std::abs(1.0 / rr - 1.0));
        ga.cs2max = std::max(ga.cs2max, cfg.law.dp(std::max(r, 0.0)));
    }
    ga.cs2max = std::max(ga.cs2max, 0.0);
    if (rho_max > cfg.max_density)
        throw BlowUpError(std::string(where) + ": density cap exceeded (max rho = " +
                          std::to_string(rho_max) + ")");
    double adm = cfg.law.admissible_max();
    if (std::isfinite(adm) && rho_max >= 0.95 * adm)
        throw BlowUpError(std::string(where) + ": density reached 0.95 of the pressure-law pole");
    if (ga.vmax > cfg.max_velocity)
        throw BlowUpError(std::string(where) + ": velocity cap exceeded (max |u| = " +
                          std::to_string(ga.vmax) + ")");
    return ga;
}

// Advective/acoustic CFL plus an explicit-diffusion budget for the V(u - m)
// correction (the exact exponential only removes the V(m) part).
double stable_dt(const Gauge& ga, const SolverConfig& cfg, const TorusGrid& g) {
    double speed = ga.vmax + std::sqrt(ga.cs2max);
    double dt_adv = 0.5 / std::max(speed * g.n, 1e-30);
    double nu = (cfg.stress.mu + std::max(cfg.stress.mu + cfg.stress.lambda, 0.0) +
                 cfg.stress.deltaA_norm) * ga.maxdev;
    double ksq = kTwoPi * kTwoPi * g.d * (g.n / 2.0) * (g.n / 2.0);
    double dt_diff = 0.8 / std::max(nu * ksq, 1e-30);
    return std::min({dt_adv, dt_diff, cfg.dt});
}

VectorField velocity_of(const Fields& y, double floor) {
    const TorusGrid& g = y.rho.grid();
    VectorField u(g);
    for (int a = 0; a < g.d; ++a)
        for (std::size_t i = 0; i < y.rho.size(); ++i)
            u[a][i] = y.m[a][i] / std::max(y.rho[i], floor);
    return u;
}

// Everything outside the exact Fourier exponentials: transport of mass and
// momentum, pressure gradient, the alpha grad rho . grad u correction, the
// forcing, and the V(u - m) remainder of the viscous force.
Fields tendency(double t, const Fields& y, const SolverConfig& cfg, double floor) {
    const TorusGrid& g = y.rho.grid();
    const int d = g.d;
    Fields G{ScalarField(g), VectorField(g)};

    ScalarField divm = divergence(y.m);
    for (std::size_t i = 0; i < divm.size(); ++i) G.rho[i] = -divm[i];

    VectorField u = velocity_of(y, floor);

    for (int a = 0; a < d; ++a) {
        VectorField row(g);
        for (int b = 0; b < d; ++b)
            for (std::size_t i = 0; i < y.rho.size(); ++i) row[b][i] = y.m[a][i] * u[b][i];
        ScalarField dr = divergence(row);
        for (std::size_t i = 0; i < dr.size(); ++i) G.m[a][i] = -dr[i];
    }

    ScalarField P = eval(cfg.law, y.rho);
    VectorField gP = gradient(P);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < P.size(); ++i) G.m[a][i] -= gP[a][i];

    if (cfg.alpha != 0.0) {
        VectorField gr = gradient(y.rho);
        for (int a = 0; a < d; ++a) {
            VectorField gu = gradient(u[a]);
            for (std::size_t i = 0; i < P.size(); ++i) {
                double acc = 0.0;
                for (int b = 0; b < d; ++b) acc += gr[b][i] * gu[b][i];
                G.m[a][i] -= cfg.alpha * acc;
            }
        }
    }

    if (cfg.forcing) {
        VectorField f = cfg.forcing(t, g);
        if (!(f.grid() == g)) throw ConfigError("solver: forcing returned a mismatched grid");
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < P.size(); ++i) G.m[a][i] += y.rho[i] * f[a][i];
    }

    VectorField w(g);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < P.size(); ++i) w[a][i] = u[a][i] - y.m[a][i];
    VectorField Vw = anisotropic_apply(w, cfg.stress, t);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < P.size(); ++i) G.m[a][i] += Vw[a][i];

    return G;
}

Fields apply_exponential(const Fields& y, const SolverConfig& cfg, double t, double dt) {
    const TorusGrid& g = y.rho.grid();
    Fields out{ScalarField(g), VectorField(g)};
    if (cfg.alpha > 0.0) {
        const double fac = -cfg.alpha * kTwoPi * kTwoPi * dt;
        out.rho = apply_multiplier(y.rho, [fac](std::span<const int> k) {
            double k2 = 0.0;
            for (int v : k) k2 += static_cast<double>(v) * v;
            return std::complex<double>(std::exp(fac * k2), 0.0);
        });
    } else {
        out.rho = y.rho;
    }
    std::vector<SpectralField> mh;
    for (int a = 0; a < g.d; ++a) mh.push_back(forward_fft(y.m[a]));
    apply_viscous_exponential(mh, cfg.stress, t, dt);
    for (int a = 0; a < g.d; ++a) out.m[a] = inverse_fft(mh[static_cast<std::size_t>(a)]);
    return out;
}

void condition(Fields& y, const SolverConfig& cfg, const char* where) {
    if (cfg.dealias) {
        y.rho = dealias_23(y.rho);
        for (int a = 0; a < y.m.dim(); ++a) y.m[a] = dealias_23(y.m[a]);
    }
    clip_negatives(y.rho, where);
}

// One integrating-factor Heun step: exact exponential for the stiff diffusion
// wrapped around a two-stage strong-stability update of the rest.
Fields substep(const Fields& y, double t, double dt, const SolverConfig& cfg, double floor) {
    const TorusGrid& g = y.rho.grid();
    const int d = g.d;

    Fields g1 = tendency(t, y, cfg, floor);
    Fields pre{ScalarField(g), VectorField(g)};
    for (std::size_t i = 0; i < y.rho.size(); ++i) pre.rho[i] = y.rho[i] + dt * g1.rho[i];
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < y.rho.size(); ++i) pre.m[a][i] = y.m[a][i] + dt * g1.m[a][i];
    Fields s1 = apply_exponential(pre, cfg, t, dt);
    condition(s1, cfg, "stage 1");

    Fields ey = apply_exponential(y, cfg, t, dt);
    Fields g2 = tendency(t + dt, s1, cfg, floor);

    Fields out{ScalarField(g), VectorField(g)};
    for (std::size_t i = 0; i < y.rho.size(); ++i)
        out.rho[i] = 0.5 * ey.rho[i] + 0.5 * (s1.rho[i] + dt * g2.rho[i]);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < y.rho.size(); ++i)
            out.m[a][i] = 0.5 * ey.m[a][i] + 0.5 * (s1.m[a][i] + dt * g2.m[a][i]);
    condition(out, cfg, "stage 2");
    return out;
}

} // namespace

FluidState::FluidState(double time, ScalarField density, VectorField momentum)
    : t(time), rho(std::move(density)), m(std::move(momentum)) {
    if (!(rho.grid() == m.grid())) throw ConfigError("FluidState: density/momentum grid mismatch");
    if (!std::isfinite(t)) throw ConfigError("FluidState: non-finite time");
}

void BudgetSeries::append(double time, double mass_v, double ekin_v, double epot_v,
                          double diss_v, double rho_v) {
    t.push_back(time);
    mass.push_back(mass_v);
    ekin.push_back(ekin_v);
    epot.push_back(epot_v);
    diss.push_back(diss_v);
    rho_gamma_a.push_back(rho_v);
}

void BudgetSeries::to_csv(const std::string& path) const {
    CsvWriter w(path, {"t", "mass", "ekin", "epot", "diss", "rho_gamma_a"});
    for (std::size_t i = 0; i < t.size(); ++i)
        w.row({t[i], mass[i], ekin[i], epot[i], diss[i], rho_gamma_a[i]});
}

BudgetSample measure_budget(const FluidState& s, const SolverConfig& cfg) {
    const TorusGrid& g = s.rho.grid();
    const int d = g.d;
    const double floor = resolve_floor(cfg, s.rho);
    const double gamma = cfg.law.declared_gamma;
    const double expo = gamma * (1.0 + 2.0 / d) - 1.0; // gamma + a, a = 2 gamma/d - 1

    BudgetSample b;
    b.mass = mean(s.rho);
    double ekin_sum = 0.0, epot_sum = 0.0, extra_sum = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        double r = s.rho[i];
        double m2 = 0.0;
        for (int a = 0; a < d; ++a) m2 += s.m[a][i] * s.m[a][i];
        ekin_sum += m2 / (2.0 * std::max(r, floor));
        if (r > 1e-300) epot_sum += r * cfg.law.energy(r);
        extra_sum += std::pow(std::max(r, 0.0), expo);
    }
    const double inv_n = 1.0 / static_cast<double>(s.rho.size());
    b.ekin = ekin_sum * inv_n;
    b.epot = epot_sum * inv_n;
    b.rho_gamma_a = extra_sum * inv_n;

    Fields y{s.rho, s.m};
    VectorField u = velocity_of(y, floor);
    double grad2 = 0.0;
    for (int a = 0; a < d; ++a) {
        VectorField gu = gradient(u[a]);
        for (int c = 0; c < d; ++c) {
            double n2 = l2_norm(gu[c]);
            grad2 += n2 * n2;
        }
    }
    ScalarField divu = divergence(u);
    double dn = l2_norm(divu);
    b.diss_rate = cfg.stress.mu * grad2 + (cfg.stress.lambda + cfg.stress.mu) * dn * dn;
    return b;
}

FluidState step(const FluidState& state, const SolverConfig& cfg) {
    validate_cfg(cfg);
    const TorusGrid& g = state.rho.grid();
    if (g.d != cfg.stress.d) throw ConfigError("solver: grid/stress dimension mismatch");

    const double floor = resolve_floor(cfg, state.rho);
    Fields y{state.rho, state.m};
    double t = state.t;
    const double target = state.t + cfg.dt;
    int count = 0;
    while (target - t > 1e-14 * std::max(1.0, std::abs(target))) {
        if (++count > cfg.max_substeps)
            throw BlowUpError("step: substep budget exhausted before reaching the target time");
        Gauge ga = inspect(y, cfg, floor, "step");
        double dts = std::min(stable_dt(ga, cfg, g), target - t);
        if (!(dts > 0.0) || dts < cfg.dt * 1e-9)
            throw BlowUpError("step: stable time step collapsed");
        y = substep(y, t, dts, cfg, floor);
        t += dts;
    }
    return FluidState(target, std::move(y.rho), std::move(y.m));
}

RunResult run(const FluidState& initial, const SolverConfig& cfg) {
    validate_cfg(cfg);
    const TorusGrid& g = initial.rho.grid();
    if (g.d != cfg.stress.d) throw ConfigError("run: grid/stress dimension mismatch");
    if (!(cfg.t_end >= initial.t)) throw ConfigError("run: t_end precedes the initial time");

    for (std::size_t i = 0; i < initial.rho.size(); ++i)
        if (!std::isfinite(initial.rho[i])) throw ConfigError("run: non-finite initial density");
    for (int a = 0; a < g.d; ++a)
        for (std::size_t i = 0; i < initial.rho.size(); ++i)
            if (!std::isfinite(initial.m[a][i])) throw ConfigError("run: non-finite initial momentum");

    double adm = cfg.law.admissible_max();
    if (std::isfinite(adm) && max_value(initial.rho) >= 0.95 * adm)
        throw ConfigError("run: initial density reaches 0.95 of the pressure-law pole");

    preflight_symbol_checks(g, cfg.stress);

    SolverConfig ecfg = cfg;
    ecfg.rho_floor = resolve_floor(cfg, initial.rho);

    // The trajectory stores the operand the scheme actually evolves: the
    // initial state after undershoot clipping and, when enabled, dealiasing.
    Fields y{initial.rho, initial.m};
    clip_negatives(y.rho, "run: initial data");
    if (cfg.dealias) {
        y.rho = dealias_23(y.rho);
        for (int a = 0; a < g.d; ++a) y.m[a] = dealias_23(y.m[a]);
        clip_negatives(y.rho, "run: initial data after dealiasing");
    }

    RunResult res;
    res.rho_floor_used = ecfg.rho_floor;
    res.budgets.integrability_exponent =
        cfg.law.declared_gamma * (1.0 + 2.0 / g.d) - 1.0;

    FluidState cur(initial.t, std::move(y.rho), std::move(y.m));
    res.trajectory.push_back(cur);
    BudgetSample b0 = measure_budget(cur, ecfg);
    res.budgets.append(cur.t, b0.mass, b0.ekin, b0.epot, 0.0, b0.rho_gamma_a);

    double diss_total = 0.0;
    double prev_rate = b0.diss_rate;
    const double total = cfg.t_end - initial.t;
    const long nsteps = total <= 0.0 ? 0 : static_cast<long>(std::ceil(total / cfg.dt - 1e-9));
    for (long i = 0; i < nsteps; ++i) {
        ecfg.dt = std::min(cfg.dt, cfg.t_end - cur.t);
        if (!(ecfg.dt > 0.0)) break;
        try {
            cur = step(cur, ecfg);
        } catch (const BlowUpError& e) {
            res.blew_up = true;
            res.abort_reason = e.what();
            break;
        }
        BudgetSample b = measure_budget(cur, ecfg);
        diss_total += 0.5 * (prev_rate + b.diss_rate) * ecfg.dt;
        prev_rate = b.diss_rate;
        res.budgets.append(cur.t, b.mass, b.ekin, b.epot, diss_total, b.rho_gamma_a);
        if (cfg.snapshot_every > 0 && (i + 1) % cfg.snapshot_every == 0 && i + 1 < nsteps)
            res.trajectory.push_back(cur);
    }
    if (res.trajectory.back().t != cur.t) res.trajectory.push_back(cur);
    return res;
}

ScalarField effective_flux(const FluidState& prev, const FluidState& next, double rho_floor) {
    const TorusGrid& g = prev.rho.grid();
    if (!(g == next.rho.grid())) throw ConfigError("effective_flux: grid mismatch");
    const double dt = next.t - prev.t;
    if (!(dt > 0.0)) throw ConfigError("effective_flux: snapshots must be strictly ordered in time");
    const int d = g.d;

    ScalarField rho_mid(g);
    VectorField m_mid(g), u_mid(g);
    for (std::size_t i = 0; i < rho_mid.size(); ++i)
        rho_mid[i] = 0.5 * (prev.rho[i] + next.rho[i]);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < rho_mid.size(); ++i) {
            m_mid[a][i] = 0.5 * (prev.m[a][i] + next.m[a][i]);
            u_mid[a][i] = m_mid[a][i] / std::max(rho_mid[i], rho_floor);
        }

    VectorField inner(g);
    for (int a = 0; a < d; ++a) {
        VectorField row(g);
        for (int b = 0; b < d; ++b)
            for (std::size_t i = 0; i < rho_mid.size(); ++i) row[b][i] = m_mid[a][i] * u_mid[b][i];
        ScalarField dr = divergence(row);
        for (std::size_t i = 0; i < rho_mid.size(); ++i)
            inner[a][i] = (next.m[a][i] - prev.m[a][i]) / dt + dr[i];
    }
    return inverse_laplacian_zero_mean(divergence(inner));
}

} // namespace nslab
