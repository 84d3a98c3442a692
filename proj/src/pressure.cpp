#include "nslab/pressure.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace nslab {

namespace {

// Adaptive Simpson with the standard |S2-S1|/15 error estimate.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double fa, double fm, double fb, double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    double flm = f(lm), frm = f(rm);
    double s1 = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    double s2 = (hi - lo) / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb);
    if (depth <= 0) {
        // A Hoelder corner (e.g. s^{g-2} near 0) keeps shrinking the estimate
        // but never meets a geometrically tightening tolerance; accept it once
        // the residual is negligible, reject only a genuinely wild integrand.
        if (std::abs(s2 - s1) > 15.0 * tol * 1e3)
            throw RuntimeError("internal_energy: quadrature did not converge");
        return s2 + (s2 - s1) / 15.0;
    }
    if (std::abs(s2 - s1) <= 15.0 * tol) return s2 + (s2 - s1) / 15.0;
    double child_tol = std::max(0.5 * tol, 2e-16);
    return adaptive_simpson(f, lo, mid, fa, flm, fm, child_tol, depth - 1) +
           adaptive_simpson(f, mid, hi, fm, frm, fb, child_tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (lo == hi) return 0.0;
    double sign = 1.0;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }
    double mid = 0.5 * (lo + hi);
    return sign * adaptive_simpson(f, lo, hi, f(lo), f(mid), f(hi), tol, 48);
}

double horner(const std::vector<double>& coeff, double s) {
    double v = 0.0;
    for (std::size_t i = coeff.size(); i-- > 0;) v = v * s + coeff[i];
    return v;
}

} // namespace

PressureLaw PressureLaw::make_power(double a, double gamma) {
    if (a <= 0.0) throw ConfigError("power law: prefactor must be positive");
    if (gamma <= 0.0) throw ConfigError("power law: exponent must be positive");
    PressureLaw l;
    l.kind = PressureKind::power;
    l.a = a;
    l.declared_gamma = gamma;
    l.rho_ref = gamma > 1.0 ? 0.0 : 1.0;
    return l;
}

PressureLaw PressureLaw::make_van_der_waals(double a, double b, double c, double theta) {
    if (b <= 0.0 || c <= 0.0 || theta <= 0.0 || a < 0.0)
        throw ConfigError("van der Waals law: need b, c, theta > 0 and a >= 0");
    PressureLaw l;
    l.kind = PressureKind::van_der_waals_isothermal;
    l.a = a;
    l.b = b;
    l.c = c;
    l.theta = theta;
    // Near the pole P grows faster than any power; gamma only drives the
    // threshold bookkeeping and the sandwich check on the sampled range.
    l.declared_gamma = 2.0;
    l.rho_ref = 1.0; // P(s)/s^2 ~ c theta/(b s) at 0: not integrable
    if (b <= 1.0) l.rho_ref = 0.5 * b; // keep the reference inside the domain
    return l;
}

PressureLaw PressureLaw::make_virial(double gamma, double theta, std::vector<double> B) {
    if (B.empty()) throw ConfigError("virial law: coefficient list empty");
    if (B[0] != 0.0)
        throw ConfigError("virial law: constant term must vanish (P(0) = 0 is required)");
    int N = static_cast<int>(B.size()) - 1;
    if (!(gamma > 2.0 * N) || N < 2)
        throw ConfigError("virial law: need exponent > 2N with N >= 2");
    PressureLaw l;
    l.kind = PressureKind::truncated_virial;
    l.theta = theta;
    l.virial_B = std::move(B);
    l.declared_gamma = gamma;
    l.rho_ref = (l.virial_B.size() > 1 && l.virial_B[1] != 0.0) ? 1.0 : 0.0;
    return l;
}

PressureLaw PressureLaw::make_oscillatory(double gamma, double amp, double freq) {
    if (gamma <= 1.0) throw ConfigError("oscillatory law: exponent must exceed 1");
    if (std::abs(amp) >= 1.0) throw ConfigError("oscillatory law: |amplitude| must be < 1");
    if (freq < 0.0) throw ConfigError("oscillatory law: frequency must be nonnegative");
    PressureLaw l;
    l.kind = PressureKind::oscillatory_perturbation;
    l.osc_amp = amp;
    l.osc_freq = freq;
    l.declared_gamma = gamma;
    l.rho_ref = 0.0;
    return l;
}

double PressureLaw::admissible_max() const {
    switch (kind) {
        case PressureKind::van_der_waals_isothermal: return b;
        // The tail replaces the base law above the seam, so any base pole
        // (always beyond the seam by construction) is gone.
        case PressureKind::quasi_monotone_truncation: return std::numeric_limits<double>::infinity();
        default: return std::numeric_limits<double>::infinity();
    }
}

double PressureLaw::p(double s) const {
    switch (kind) {
        case PressureKind::power:
            return a * std::pow(s, declared_gamma);
        case PressureKind::van_der_waals_isothermal:
            if (s >= b) throw RuntimeError("van der Waals law: density reached the pole at b");
            return c * s * theta / (b - s) - a * s * s;
        case PressureKind::truncated_virial:
            return std::pow(s, declared_gamma) + theta * horner(virial_B, s);
        case PressureKind::oscillatory_perturbation:
            return std::pow(s, declared_gamma) * (1.0 + osc_amp * std::sin(osc_freq * s));
        case PressureKind::quasi_monotone_truncation:
            if (s <= trunc_c0) return base->p(s);
            return base->p(trunc_c0) + trunc_C * std::pow(s - trunc_c0, declared_gamma);
    }
    throw RuntimeError("pressure law: unknown kind");
}

double PressureLaw::dp(double s) const {
    switch (kind) {
        case PressureKind::power:
            return a * declared_gamma * std::pow(s, declared_gamma - 1.0);
        case PressureKind::van_der_waals_isothermal: {
            if (s >= b) throw RuntimeError("van der Waals law: density reached the pole at b");
            double d = b - s;
            return c * theta * b / (d * d) - 2.0 * a * s;
        }
        case PressureKind::truncated_virial: {
            double dpoly = 0.0;
            for (std::size_t n = virial_B.size(); n-- > 1;)
                dpoly = dpoly * s + static_cast<double>(n) * virial_B[n];
            return declared_gamma * std::pow(s, declared_gamma - 1.0) + theta * dpoly;
        }
        case PressureKind::oscillatory_perturbation: {
            double g = declared_gamma;
            return g * std::pow(s, g - 1.0) * (1.0 + osc_amp * std::sin(osc_freq * s)) +
                   std::pow(s, g) * osc_amp * osc_freq * std::cos(osc_freq * s);
        }
        case PressureKind::quasi_monotone_truncation:
            if (s <= trunc_c0) return base->dp(s);
            return trunc_C * declared_gamma * std::pow(s - trunc_c0, declared_gamma - 1.0);
    }
    throw RuntimeError("pressure law: unknown kind");
}

double PressureLaw::energy(double s) const {
    const double tol = 1e-11;
    switch (kind) {
        case PressureKind::power: {
            double g = declared_gamma;
            if (g == 1.0) return a * std::log(s / rho_ref);
            double ref = rho_ref == 0.0 ? 0.0 : a * std::pow(rho_ref, g - 1.0) / (g - 1.0);
            return a * std::pow(s, g - 1.0) / (g - 1.0) - ref;
        }
        case PressureKind::van_der_waals_isothermal: {
            if (s >= b) throw RuntimeError("van der Waals law: density reached the pole at b");
            // int [c theta/(r(b-r)) - a] dr = (c theta / b) log(r/(b-r)) - a r
            auto prim = [&](double r) { return (c * theta / b) * std::log(r / (b - r)) - a * r; };
            return prim(s) - prim(rho_ref);
        }
        case PressureKind::truncated_virial: {
            double g = declared_gamma;
            auto prim = [&](double r) {
                double v = std::pow(r, g - 1.0) / (g - 1.0);
                for (std::size_t n = 2; n < virial_B.size(); ++n)
                    v += theta * virial_B[n] * std::pow(r, static_cast<double>(n) - 1.0) /
                         (static_cast<double>(n) - 1.0);
                if (virial_B.size() > 1 && virial_B[1] != 0.0) v += theta * virial_B[1] * std::log(r);
                return v;
            };
            if (rho_ref == 0.0) return prim(s); // all antiderivative terms vanish at 0
            return prim(s) - prim(rho_ref);
        }
        case PressureKind::oscillatory_perturbation: {
            double g = declared_gamma;
            // Power part closed form; the sin part has a removable singularity
            // at 0 (the integrand behaves like freq * r^(g-1)).
            double core = std::pow(s, g - 1.0) / (g - 1.0);
            auto osc = [&](double r) {
                return r == 0.0 ? 0.0 : std::pow(r, g - 2.0) * std::sin(osc_freq * r);
            };
            return core + osc_amp * integrate(osc, 0.0, s, tol);
        }
        case PressureKind::quasi_monotone_truncation: {
            if (s <= trunc_c0) return base->energy(s);
            double head = base->energy(trunc_c0);
            double pc0 = base->p(trunc_c0);
            double g = declared_gamma;
            // int_{c0}^{s} [P(c0) + C (r-c0)^g] / r^2 dr
            double tail_const = pc0 * (1.0 / trunc_c0 - 1.0 / s);
            auto tail = [&](double r) { return trunc_C * std::pow(r - trunc_c0, g) / (r * r); };
            return head + tail_const + integrate(tail, trunc_c0, s, tol);
        }
    }
    throw RuntimeError("pressure law: unknown kind");
}

std::string PressureLaw::describe() const {
    std::ostringstream os;
    switch (kind) {
        case PressureKind::power: os << "power(a=" << a << ", gamma=" << declared_gamma << ")"; break;
        case PressureKind::van_der_waals_isothermal:
            os << "van_der_waals(a=" << a << ", b=" << b << ", c=" << c << ", theta=" << theta << ")";
            break;
        case PressureKind::truncated_virial:
            os << "virial(gamma=" << declared_gamma << ", N=" << virial_B.size() - 1 << ")";
            break;
        case PressureKind::oscillatory_perturbation:
            os << "oscillatory(gamma=" << declared_gamma << ", amp=" << osc_amp << ", freq=" << osc_freq << ")";
            break;
        case PressureKind::quasi_monotone_truncation:
            os << "truncated[" << base->describe() << "; c0=" << trunc_c0 << ", C=" << trunc_C << "]";
            break;
    }
    return os.str();
}

ScalarField eval(const PressureLaw& law, const ScalarField& rho) {
    ScalarField out(rho.grid());
    auto in = rho.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] < 0.0)
            throw RuntimeError("pressure eval: negative density at node " + std::to_string(i));
        out[i] = law.p(in[i]);
    }
    out.check_finite("pressure eval");
    return out;
}

ScalarField eval_prime(const PressureLaw& law, const ScalarField& rho, bool validate) {
    if (validate && law.declared_Pbar <= 0.0)
        throw ConfigError("eval_prime: validation requires a declared derivative-bound constant");
    ScalarField out(rho.grid());
    auto in = rho.values();
    const double gt = law.gamma_tilde();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] < 0.0)
            throw RuntimeError("pressure eval_prime: negative density at node " + std::to_string(i));
        out[i] = law.dp(in[i]);
        if (validate) {
            double bound = law.declared_Pbar * std::pow(in[i], gt - 1.0);
            if (std::abs(out[i]) > bound * (1.0 + 1e-12))
                throw HypothesisError("derivative-growth bound violated at node " + std::to_string(i) +
                                      ": |P'(" + std::to_string(in[i]) + ")| = " + std::to_string(std::abs(out[i])) +
                                      " > " + std::to_string(bound));
        }
    }
    out.check_finite("pressure eval_prime");
    return out;
}

ScalarField internal_energy(const PressureLaw& law, const ScalarField& rho) {
    ScalarField out(rho.grid());
    auto in = rho.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] < 0.0)
            throw RuntimeError("internal_energy: negative density at node " + std::to_string(i));
        if (in[i] == 0.0 && law.rho_ref > 0.0)
            throw RuntimeError("internal_energy: vacuum node with a nonzero reference density");
        out[i] = in[i] == 0.0 ? 0.0 : law.energy(in[i]);
    }
    out.check_finite("internal_energy");
    return out;
}

PressureLaw truncate_quasi_monotone(const PressureLaw& law, double c0, double C) {
    if (c0 <= 0.0 || C <= 0.0) throw ConfigError("truncate_quasi_monotone: c0 and C must be positive");
    if (law.kind == PressureKind::van_der_waals_isothermal && c0 >= law.b)
        throw ConfigError("truncate_quasi_monotone: seam beyond the base law's domain");
    if (!(law.declared_gamma > 1.0))
        throw ConfigError("truncate_quasi_monotone: base exponent must exceed 1");

    PressureLaw out;
    out.kind = PressureKind::quasi_monotone_truncation;
    out.trunc_c0 = c0;
    out.trunc_C = C;
    out.base = std::make_shared<PressureLaw>(law);
    out.declared_gamma = law.declared_gamma;
    out.declared_gamma_tilde = law.declared_gamma_tilde;
    out.declared_Pbar = law.declared_Pbar;
    out.rho_ref = law.rho_ref;

    // Beyond the seam: (P_eps(s)/s)' s^2 = P_eps'(s) s - P_eps(s)
    //   >= C (g-1) (s-c0)^g - P(c0),
    // so s -> P_eps(s)/s is nondecreasing once the tail beats P(c0).
    double g = law.declared_gamma;
    double pc0 = law.p(c0);
    out.rho0_monotone = pc0 <= 0.0 ? c0 : c0 + std::pow(pc0 / (C * (g - 1.0)), 1.0 / g);
    return out;
}

double isotropic_gamma_threshold(double gamma_tilde, int d) {
    return (std::max(2.0, gamma_tilde) + 1.0) * d / (d + 2.0);
}

double anisotropic_gamma_threshold(int d) {
    double invd = 1.0 / d;
    return 0.5 * d * ((1.0 + invd) + std::sqrt(1.0 + invd * invd));
}

HypothesisReport check_hypotheses(const PressureLaw& law, int d,
                                  const std::optional<AnisotropyInfo>& aniso) {
    if (d < 1 || d > 3) throw ConfigError("check_hypotheses: dimension must be 1, 2, or 3");
    HypothesisReport rep;
    const double g = law.declared_gamma;
    const double gt = law.gamma_tilde();
    const bool anisotropic_mode = aniso.has_value() && aniso->deltaA_norm > 0.0;

    // Sample densities log-spaced in [1e-3, 1e3], capped below any pole, and
    // below the seam for truncations (the tail has its own exact bound).
    double lo = 1e-3, hi = 1e3;
    double cap = law.admissible_max();
    if (std::isfinite(cap)) hi = std::min(hi, 0.95 * cap);
    const int nsamp = 601;
    std::vector<double> sample(nsamp);
    for (int i = 0; i < nsamp; ++i)
        sample[static_cast<std::size_t>(i)] =
            lo * std::pow(hi / lo, static_cast<double>(i) / (nsamp - 1));

    {
        HypothesisEntry e;
        e.name = "pressure_vanishes_at_zero";
        e.threshold = 1e-12;
        e.measured = std::abs(law.p(0.0));
        e.pass = e.measured <= e.threshold;
        e.gates = true;
        rep.entries.push_back(e);
    }

    {
        // Smallest C with C^{-1} s^g - C <= P(s) <= C s^g + C on the sample.
        auto ok = [&](double C) {
            for (double s : sample) {
                double ps = law.p(s), sg = std::pow(s, g);
                if (ps > C * sg + C) return false;
                if (sg / C - C > ps) return false;
            }
            return true;
        };
        HypothesisEntry e;
        e.name = "growth_sandwich_constant";
        e.threshold = 1e6;
        if (!ok(e.threshold)) {
            e.measured = std::numeric_limits<double>::infinity();
            e.pass = false;
        } else {
            double loC = 1e-9, hiC = e.threshold;
            for (int it = 0; it < 200; ++it) {
                double mid = std::sqrt(loC * hiC);
                (ok(mid) ? hiC : loC) = mid;
            }
            // 5% headroom so the reported constant also holds between the
            // sample points, where an oscillatory law can dip slightly lower.
            e.measured = hiC * 1.05;
            e.pass = true;
        }
        e.gates = true;
        {
            std::ostringstream note;
            note << "sampled on [" << lo << ", " << hi << "]";
            e.note = note.str();
        }
        rep.entries.push_back(e);
    }

    {
        // sup |P'(s)| / s^(gt-1) on the sample (below the seam for truncations).
        double sup = 0.0;
        for (double s : sample) {
            if (law.kind == PressureKind::quasi_monotone_truncation && s > law.trunc_c0) continue;
            sup = std::max(sup, std::abs(law.dp(s)) / std::pow(s, gt - 1.0));
        }
        HypothesisEntry e;
        e.name = "derivative_growth_constant";
        e.measured = sup;
        if (law.declared_Pbar > 0.0) {
            e.threshold = law.declared_Pbar;
            e.pass = sup <= law.declared_Pbar * (1.0 + 1e-9);
            e.note = "checked against the declared constant";
        } else {
            e.threshold = sup;
            e.pass = std::isfinite(sup);
            e.note = "no declared constant; sampled supremum adopted";
        }
        e.gates = true;
        rep.entries.push_back(e);
    }

    if (law.kind == PressureKind::quasi_monotone_truncation) {
        // Tail branch: |P'| = C g (s-c0)^(g-1) <= C g s^(g-1) exactly.
        HypothesisEntry e;
        e.name = "truncation_tail_derivative";
        e.threshold = law.trunc_C * g;
        double sup = 0.0;
        for (double s : sample)
            if (s > law.trunc_c0)
                sup = std::max(sup, std::abs(law.dp(s)) / std::pow(s, g - 1.0));
        e.measured = sup;
        e.pass = sup <= e.threshold * (1.0 + 1e-9);
        rep.entries.push_back(e);
    }

    {
        HypothesisEntry e;
        e.name = "isotropic_exponent_threshold";
        e.threshold = isotropic_gamma_threshold(gt, d);
        e.measured = g;
        e.pass = g > e.threshold;
        e.gates = !anisotropic_mode;
        rep.entries.push_back(e);
    }

    {
        HypothesisEntry e;
        e.name = "anisotropic_exponent_threshold";
        e.threshold = anisotropic_gamma_threshold(d);
        e.measured = g;
        e.pass = g > e.threshold;
        e.gates = anisotropic_mode;
        rep.entries.push_back(e);
    }

    if (aniso.has_value()) {
        {
            HypothesisEntry e;
            e.name = "stress_ellipticity";
            e.threshold = 0.0;
            e.measured = 2.0 * aniso->mu / d + aniso->lambda - aniso->deltaA_norm;
            e.pass = e.measured > 0.0;
            e.gates = true;
            rep.entries.push_back(e);
        }
        {
            HypothesisEntry e;
            e.name = "anisotropy_smallness_a_mu";
            e.threshold = 0.5;
            e.measured = 2.0 * aniso->deltaA_norm / (2.0 * aniso->mu + aniso->lambda);
            e.pass = e.measured <= e.threshold;
            e.gates = anisotropic_mode;
            e.note = "a_mu = 2 |deltaA| / (2 mu + lambda); 1/2 keeps the nonlocal multiplier a contraction";
            rep.entries.push_back(e);
        }
    }

    return rep;
}

std::string HypothesisReport::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << (e.pass ? "[pass] " : "[FAIL] ") << e.name
           << ": measured=" << e.measured << " threshold=" << e.threshold
           << (e.gates ? " (gating)" : "");
        if (!e.note.empty()) os << " -- " << e.note;
        os << '\n';
    }
    os << (all_gating_pass() ? "hypotheses: all gating checks pass\n"
                             : "hypotheses: at least one gating check FAILED\n");
    return os.str();
}

} // namespace nslab
