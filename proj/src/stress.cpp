#include "nslab/stress.hpp"

#include <cmath>

#include "nslab/fft.hpp"
#include "nslab/spectral.hpp"

namespace nslab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Cyclic Jacobi diagonalization; plenty for d <= 3.
void jacobi_rotate(double a[3][3], int d) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) return;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(phi), s = std::sin(phi);
                double app = a[p][p], aqq = a[q][q], apq = a[p][q];
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = a[q][p] = 0.0;
                for (int r = 0; r < d; ++r) {
                    if (r == p || r == q) continue;
                    double arp = a[r][p], arq = a[r][q];
                    a[r][p] = a[p][r] = c * arp - s * arq;
                    a[r][q] = a[q][r] = s * arp + c * arq;
                }
            }
    }
}

// deltaA quadratic form in integer frequencies. Cross products are dropped
// when either factor sits at Nyquist: such a product has no consistent sign
// on the half lattice (k = n/2 and k = -n/2 are the same stored mode).
double quad_form(const SymMatrix& A, std::span<const int> k, int d, int nyq) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += A[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] *
                                      static_cast<double>(k[a]) * k[a];
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            double ka = std::abs(k[a]) == nyq ? 0.0 : static_cast<double>(k[a]);
            double kb = std::abs(k[b]) == nyq ? 0.0 : static_cast<double>(k[b]);
            s += 2.0 * A[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * ka * kb;
        }
    return s;
}

double k_squared(std::span<const int> k) {
    double s = 0.0;
    for (int v : k) s += static_cast<double>(v) * v;
    return s;
}

// e(xi) of the operator E in integer-frequency form (xi = 2 pi k):
// (xi . (deltaA/2|deltaA|) xi) * exp(-eps^2 |xi|^2 / 2).
double e_symbol(const AnisotropySpec& spec, const SymMatrix& dA,
                std::span<const int> k, int nyq) {
    double q = quad_form(dA, k, spec.d, nyq) / (2.0 * spec.deltaA_norm);
    double xi2 = kTwoPi * kTwoPi * k_squared(k);
    return q * kTwoPi * kTwoPi * std::exp(-0.5 * spec.mollifier_eps * spec.mollifier_eps * xi2);
}

void validate_table_entry(const SymMatrix& m, int d) {
    double scale = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            scale = std::max(scale, std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    double tol = 1e-12 * std::max(scale, 1.0);
    double trace = 0.0;
    for (int i = 0; i < d; ++i) {
        trace += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        for (int j = i + 1; j < d; ++j)
            if (std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                         m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) > tol)
                throw ConfigError("anisotropy table: matrix not symmetric");
    }
    if (std::abs(trace) > tol)
        throw ConfigError("anisotropy table: matrix must be trace-free (fold the trace into mu)");
}

} // namespace

double sym_spectral_norm(const SymMatrix& m, int d) {
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a[i][j] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    jacobi_rotate(a, d);
    double norm = 0.0;
    for (int i = 0; i < d; ++i) norm = std::max(norm, std::abs(a[i][i]));
    return norm;
}

AnisotropySpec AnisotropySpec::isotropic(double mu, double lambda, int d) {
    AnisotropySpec s;
    s.d = d;
    s.mu = mu;
    s.lambda = lambda;
    if (mu <= 0.0) throw ConfigError("stress: mu must be positive");
    if (2.0 * mu + lambda <= 0.0) throw ConfigError("stress: 2 mu + lambda must be positive");
    if (2.0 * mu / d + lambda <= 0.0) throw ConfigError("stress: 2 mu/d + lambda must be positive");
    return s;
}

AnisotropySpec AnisotropySpec::with_table(double mu, double lambda, int d,
                                          std::vector<double> times, std::vector<SymMatrix> tables,
                                          double mollifier_eps) {
    AnisotropySpec s = isotropic(mu, lambda, d);
    if (times.size() != tables.size()) throw ConfigError("anisotropy table: time/matrix count mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw ConfigError("anisotropy table: times must be nondecreasing");
    for (const auto& m : tables) validate_table_entry(m, d);
    s.times = std::move(times);
    s.tables = std::move(tables);
    s.mollifier_eps = mollifier_eps;
    if (mollifier_eps < 0.0) throw ConfigError("anisotropy: mollifier width must be nonnegative");
    for (const auto& m : s.tables) s.deltaA_norm = std::max(s.deltaA_norm, sym_spectral_norm(m, d));
    if (2.0 * mu / d + lambda - s.deltaA_norm <= 0.0)
        throw ConfigError("anisotropy: ellipticity margin 2 mu/d + lambda - |deltaA| must be positive");
    return s;
}

AnisotropySpec AnisotropySpec::constant(double mu, double lambda, int d, const SymMatrix& deltaA,
                                        double mollifier_eps) {
    return with_table(mu, lambda, d, {0.0}, {deltaA}, mollifier_eps);
}

const SymMatrix& AnisotropySpec::deltaA(double t) const {
    static const SymMatrix zero{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
    if (tables.empty()) return zero;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] <= t) idx = i;
    return tables[idx];
}

VectorField isotropic_apply(const VectorField& u, double mu, double lambda) {
    const TorusGrid& g = u.grid();
    const int nyq = g.n / 2;
    std::vector<SpectralField> c;
    for (int a = 0; a < g.d; ++a) c.push_back(forward_fft(u[a]));

    SpectralField divhat(g);
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        std::complex<double> s(0.0, 0.0);
        for (int a = 0; a < g.d; ++a) {
            if (std::abs(k[a]) == nyq) continue;
            s += std::complex<double>(0.0, kTwoPi * k[a]) * c[static_cast<std::size_t>(a)][lin];
        }
        divhat[lin] = s;
    });

    VectorField out(g);
    for (int a = 0; a < g.d; ++a) {
        SpectralField oa(g);
        for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
            double lap = -kTwoPi * kTwoPi * k_squared(k);
            std::complex<double> grad_a = std::abs(k[a]) == nyq
                ? std::complex<double>(0.0, 0.0)
                : std::complex<double>(0.0, kTwoPi * k[a]);
            oa[lin] = mu * lap * c[static_cast<std::size_t>(a)][lin] + (lambda + mu) * grad_a * divhat[lin];
        });
        out[a] = inverse_fft(oa);
    }
    return out;
}

VectorField anisotropic_apply(const VectorField& u, const AnisotropySpec& spec, double t) {
    const TorusGrid& g = u.grid();
    if (g.d != spec.d) throw ConfigError("anisotropic_apply: dimension mismatch");
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t);

    std::vector<SpectralField> c;
    for (int a = 0; a < g.d; ++a) c.push_back(forward_fft(u[a]));
    SpectralField divhat(g);
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        std::complex<double> s(0.0, 0.0);
        for (int a = 0; a < g.d; ++a) {
            if (std::abs(k[a]) == nyq) continue;
            s += std::complex<double>(0.0, kTwoPi * k[a]) * c[static_cast<std::size_t>(a)][lin];
        }
        divhat[lin] = s;
    });

    VectorField out(g);
    for (int a = 0; a < g.d; ++a) {
        SpectralField oa(g);
        for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
            // div(A grad u)_i = mu Lap u_i + (k' deltaA k') u_i in symbol form.
            double lap = -kTwoPi * kTwoPi * k_squared(k);
            double aniso = -kTwoPi * kTwoPi * quad_form(dA, k, g.d, nyq);
            std::complex<double> grad_a = std::abs(k[a]) == nyq
                ? std::complex<double>(0.0, 0.0)
                : std::complex<double>(0.0, kTwoPi * k[a]);
            oa[lin] = (spec.mu * lap + aniso) * c[static_cast<std::size_t>(a)][lin] +
                      (spec.mu + spec.lambda) * grad_a * divhat[lin];
        });
        out[a] = inverse_fft(oa);
    }
    return out;
}

VectorField symmetric_anisotropic_apply(const VectorField& u, const AnisotropySpec& spec, double t) {
    const TorusGrid& g = u.grid();
    if (g.d != spec.d) throw ConfigError("symmetric_anisotropic_apply: dimension mismatch");
    const int nyq = g.n / 2;
    const int d = g.d;
    const SymMatrix& dA = spec.deltaA(t);

    std::vector<SpectralField> c, o;
    for (int a = 0; a < d; ++a) {
        c.push_back(forward_fft(u[a]));
        o.emplace_back(g);
    }
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double kk[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a)
            kk[a] = std::abs(k[a]) == nyq ? 0.0 : static_cast<double>(k[a]);
        double k2 = k_squared(k);
        double qf = quad_form(dA, k, d, nyq);
        // deltaA k (Nyquist-safe components)
        double dAk[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                dAk[a] += dA[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * kk[b];
        std::complex<double> kdotu(0.0, 0.0), dAkdotu(0.0, 0.0);
        for (int a = 0; a < d; ++a) {
            kdotu += kk[a] * c[static_cast<std::size_t>(a)][lin];
            dAkdotu += dAk[a] * c[static_cast<std::size_t>(a)][lin];
        }
        const double pi2 = kTwoPi * kTwoPi;
        for (int a = 0; a < d; ++a) {
            // -mu|xi|^2 u - (mu+lambda) xi (xi.u) - 1/2[(xi.dA xi) u + xi (dA xi.u)]
            o[static_cast<std::size_t>(a)][lin] =
                pi2 * (-spec.mu * k2 * c[static_cast<std::size_t>(a)][lin] -
                       (spec.mu + spec.lambda) * kk[a] * kdotu -
                       0.5 * (qf * c[static_cast<std::size_t>(a)][lin] + kk[a] * dAkdotu));
        }
    });
    VectorField out(g);
    for (int a = 0; a < d; ++a) out[a] = inverse_fft(o[static_cast<std::size_t>(a)]);
    return out;
}

VectorField symmetric_anisotropic_invert(const VectorField& rhs, const AnisotropySpec& spec, double t) {
    const TorusGrid& g = rhs.grid();
    if (g.d != spec.d) throw ConfigError("symmetric_anisotropic_invert: dimension mismatch");
    const int nyq = g.n / 2;
    const int d = g.d;
    const SymMatrix& dA = spec.deltaA(t);

    std::vector<SpectralField> c, o;
    for (int a = 0; a < d; ++a) {
        c.push_back(forward_fft(rhs[a]));
        o.emplace_back(g);
    }
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double k2 = k_squared(k);
        if (k2 == 0.0) {
            for (int a = 0; a < d; ++a) o[static_cast<std::size_t>(a)][lin] = 0.0;
            return;
        }
        double kk[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a)
            kk[a] = std::abs(k[a]) == nyq ? 0.0 : static_cast<double>(k[a]);
        double qf = quad_form(dA, k, d, nyq);
        double dAk[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                dAk[a] += dA[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * kk[b];
        const double pi2 = kTwoPi * kTwoPi;
        // Assemble M with M u_hat = rhs_hat and solve by Gaussian elimination,
        // separately for real and imaginary parts (M is real).
        double M[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (int a = 0; a < d; ++a) {
            M[a][a] += -spec.mu * k2 - 0.5 * qf;
            for (int b = 0; b < d; ++b)
                M[a][b] += -(spec.mu + spec.lambda) * kk[a] * kk[b] - 0.5 * kk[a] * dAk[b];
        }
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) M[a][b] *= pi2;

        double A[3][6];
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) A[a][b] = M[a][b];
            A[a][d] = c[static_cast<std::size_t>(a)][lin].real();
            A[a][d + 1] = c[static_cast<std::size_t>(a)][lin].imag();
        }
        for (int col = 0; col < d; ++col) {
            int piv = col;
            for (int r = col + 1; r < d; ++r)
                if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
            if (std::abs(A[piv][col]) < 1e-14 * pi2 * std::max(k2, 1.0))
                throw RuntimeError("symmetric stress inversion: singular symbol matrix");
            for (int cc = 0; cc < d + 2; ++cc) std::swap(A[col][cc], A[piv][cc]);
            for (int r = 0; r < d; ++r) {
                if (r == col) continue;
                double f = A[r][col] / A[col][col];
                for (int cc = col; cc < d + 2; ++cc) A[r][cc] -= f * A[col][cc];
            }
        }
        for (int a = 0; a < d; ++a)
            o[static_cast<std::size_t>(a)][lin] =
                std::complex<double>(A[a][d] / A[a][a], A[a][d + 1] / A[a][a]);
    });
    VectorField out(g);
    for (int a = 0; a < d; ++a) out[a] = inverse_fft(o[static_cast<std::size_t>(a)]);
    return out;
}

void apply_viscous_exponential(std::vector<SpectralField>& mhat, const AnisotropySpec& spec,
                               double t, double dt) {
    if (mhat.empty()) return;
    const TorusGrid& g = mhat[0].grid();
    const int d = g.d;
    if (static_cast<int>(mhat.size()) != d)
        throw ConfigError("apply_viscous_exponential: component count mismatch");
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t);
    const double pi2 = kTwoPi * kTwoPi;

    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double kk[3] = {0, 0, 0};
        double kp2 = 0.0;
        for (int a = 0; a < d; ++a) {
            kk[a] = std::abs(k[a]) == nyq ? 0.0 : static_cast<double>(k[a]);
            kp2 += kk[a] * kk[a];
        }
        double sc = -pi2 * (spec.mu * k_squared(k) + quad_form(dA, k, d, nyq));
        double ec = std::exp(dt * sc);
        std::complex<double> kdotm(0.0, 0.0);
        for (int a = 0; a < d; ++a) kdotm += kk[a] * mhat[static_cast<std::size_t>(a)][lin];
        if (kp2 > 0.0) {
            double eg = std::exp(-dt * pi2 * (spec.mu + spec.lambda) * kp2);
            std::complex<double> para = kdotm / kp2;
            for (int a = 0; a < d; ++a) {
                auto& c = mhat[static_cast<std::size_t>(a)][lin];
                c = ec * (c + (eg - 1.0) * kk[a] * para);
            }
        } else {
            for (int a = 0; a < d; ++a) mhat[static_cast<std::size_t>(a)][lin] *= ec;
        }
    });
}

ScalarField amu_apply(const ScalarField& f, const AnisotropySpec& spec, double t) {
    const TorusGrid& g = f.grid();
    if (!spec.has_anisotropy()) return ScalarField(g, 0.0);
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t);
    const double amu = spec.a_mu();
    return apply_multiplier(f, [&](std::span<const int> k) {
        double k2 = k_squared(k);
        if (k2 == 0.0) return std::complex<double>(0.0, 0.0);
        double e = e_symbol(spec, dA, k, nyq);
        double denom = -kTwoPi * kTwoPi * k2 - amu * e;
        if (std::abs(denom) < 1e-8)
            throw RuntimeError("amu_apply: resonance, |denominator| < 1e-8 on the lattice");
        return std::complex<double>(e / denom, 0.0);
    });
}

double amu_symbol_max(const TorusGrid& g, const AnisotropySpec& spec, double t) {
    if (!spec.has_anisotropy()) return 0.0;
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t);
    const double amu = spec.a_mu();
    double worst = 0.0;
    for_each_freq(g, [&](std::size_t, std::span<const int> k) {
        double k2 = k_squared(k);
        if (k2 == 0.0) return;
        double e = e_symbol(spec, dA, k, nyq);
        double denom = -kTwoPi * kTwoPi * k2 - amu * e;
        if (denom != 0.0) worst = std::max(worst, std::abs(e / denom));
    });
    return worst;
}

double inv_shifted_laplacian_symbol_max(const TorusGrid& g, const AnisotropySpec& spec, double t) {
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t);
    const double amu = spec.a_mu();
    double worst = 0.0;
    for_each_freq(g, [&](std::size_t, std::span<const int> k) {
        double k2 = k_squared(k);
        if (k2 == 0.0) return;
        double lap = -kTwoPi * kTwoPi * k2;
        double e = spec.has_anisotropy() ? e_symbol(spec, dA, k, nyq) : 0.0;
        double denom = lap - amu * e;
        if (denom != 0.0) worst = std::max(worst, std::abs(lap / denom));
    });
    return worst;
}

void preflight_symbol_checks(const TorusGrid& g, const AnisotropySpec& spec) {
    std::vector<double> probe_times = spec.times.empty() ? std::vector<double>{0.0} : spec.times;
    for (double t : probe_times) {
        double amu_max = amu_symbol_max(g, spec, t);
        if (amu_max > 1.0)
            throw HypothesisError("preflight: nonlocal-multiplier symbol exceeds 1 (max " +
                                  std::to_string(amu_max) + "); reduce the anisotropy");
        double inv_max = inv_shifted_laplacian_symbol_max(g, spec, t);
        double bound = 1.0 / (1.0 - std::min(spec.a_mu(), 0.999));
        if (inv_max > bound * (1.0 + 1e-12))
            throw HypothesisError("preflight: shifted-Laplacian inverse symbol exceeds 1/(1-a_mu)");
    }
}

DivuResidual divu_relation_residual(const ScalarField& rho_prev, const VectorField& m_prev,
                                    const ScalarField& rho_next, const VectorField& m_next,
                                    double t_mid, double dt,
                                    const PressureLaw& law, const AnisotropySpec& spec,
                                    double alpha, double rho_floor,
                                    const VectorField* forcing) {
    const TorusGrid& g = rho_prev.grid();
    const int d = g.d;
    const int nyq = g.n / 2;
    const SymMatrix& dA = spec.deltaA(t_mid);
    const double amu = spec.a_mu();

    ScalarField rho_mid(g);
    VectorField m_mid(g), dtm(g), u_mid(g);
    for (std::size_t i = 0; i < rho_mid.size(); ++i)
        rho_mid[i] = 0.5 * (rho_prev[i] + rho_next[i]);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < rho_mid.size(); ++i) {
            m_mid[a][i] = 0.5 * (m_prev[a][i] + m_next[a][i]);
            dtm[a][i] = (m_next[a][i] - m_prev[a][i]) / dt;
            u_mid[a][i] = m_mid[a][i] / std::max(rho_mid[i], rho_floor);
        }

    // div(d_t m + div(m x u)): assemble the vector first, then its divergence.
    VectorField inner(g);
    for (int a = 0; a < d; ++a) {
        VectorField row(g);
        for (int b = 0; b < d; ++b)
            for (std::size_t i = 0; i < rho_mid.size(); ++i) row[b][i] = m_mid[a][i] * u_mid[b][i];
        ScalarField div_row = divergence(row);
        for (std::size_t i = 0; i < rho_mid.size(); ++i) inner[a][i] = dtm[a][i] + div_row[i];
    }
    ScalarField src = divergence(inner);

    // alpha grad rho . grad u - rho f, then its divergence.
    ScalarField src2(g, 0.0);
    if (alpha != 0.0 || forcing != nullptr) {
        VectorField extra(g);
        if (alpha != 0.0) {
            VectorField grho = gradient(rho_mid);
            for (int a = 0; a < d; ++a) {
                VectorField gua = gradient(u_mid[a]);
                for (std::size_t i = 0; i < rho_mid.size(); ++i) {
                    double s = 0.0;
                    for (int b = 0; b < d; ++b) s += grho[b][i] * gua[b][i];
                    extra[a][i] = alpha * s;
                }
            }
        }
        if (forcing != nullptr)
            for (int a = 0; a < d; ++a)
                for (std::size_t i = 0; i < rho_mid.size(); ++i)
                    extra[a][i] -= rho_mid[i] * (*forcing)[a][i];
        src2 = divergence(extra);
    }

    auto inv_op = [&](std::span<const int> k) {
        double k2 = k_squared(k);
        if (k2 == 0.0) return std::complex<double>(0.0, 0.0);
        double e = spec.has_anisotropy() ? e_symbol(spec, dA, k, nyq) : 0.0;
        return std::complex<double>(1.0 / (-kTwoPi * kTwoPi * k2 - amu * e), 0.0);
    };
    ScalarField lifted = apply_multiplier(src, inv_op);
    ScalarField lifted2 = apply_multiplier(src2, inv_op);

    ScalarField P = eval(law, rho_mid);
    double p_mean = mean(P);
    ScalarField amuP = spec.has_anisotropy() ? amu_apply(P, spec, t_mid) : ScalarField(g, 0.0);

    ScalarField divu = divergence(u_mid);
    const double visc = 2.0 * spec.mu + spec.lambda;

    DivuResidual out{ScalarField(g), p_mean};
    for (std::size_t i = 0; i < rho_mid.size(); ++i)
        out.residual[i] = visc * divu[i] - (P[i] - p_mean) - amu * amuP[i] - lifted[i] - lifted2[i];
    return out;
}

} // namespace nslab
