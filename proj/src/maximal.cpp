#include "nslab/maximal.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nslab/spectral.hpp"

namespace nslab {
namespace {

struct Offset {
    int z[3];
    double r2; // squared physical length
};

// All signed cell offsets with |z| h <= r, z_a in [-n/2, n/2), sorted by
// length so nested masks can be consumed shell by shell.
std::vector<Offset> offsets_up_to(const TorusGrid& g, double r) {
    const double h = g.spacing();
    const double cap = r * r + 1e-15;
    const int lo = -g.n / 2, hi = g.n / 2 - 1;
    std::vector<Offset> out;
    auto push = [&](int a, int b, int c) {
        double rr = (static_cast<double>(a) * a + static_cast<double>(b) * b +
                     static_cast<double>(c) * c) * h * h;
        if (rr <= cap) out.push_back(Offset{{a, b, c}, rr});
    };
    if (g.d == 1) {
        for (int a = lo; a <= hi; ++a) push(a, 0, 0);
    } else if (g.d == 2) {
        for (int a = lo; a <= hi; ++a)
            for (int b = lo; b <= hi; ++b) push(a, b, 0);
    } else {
        for (int a = lo; a <= hi; ++a)
            for (int b = lo; b <= hi; ++b)
                for (int c = lo; c <= hi; ++c) push(a, b, c);
    }
    std::sort(out.begin(), out.end(), [](const Offset& x, const Offset& y) {
        if (x.r2 != y.r2) return x.r2 < y.r2;
        if (x.z[0] != y.z[0]) return x.z[0] < y.z[0];
        if (x.z[1] != y.z[1]) return x.z[1] < y.z[1];
        return x.z[2] < y.z[2];
    });
    return out;
}

std::vector<int> wrap_table(int n, int z) {
    std::vector<int> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int j = (i + z) % n;
        if (j < 0) j += n;
        w[static_cast<std::size_t>(i)] = j;
    }
    return w;
}

// dst += src shifted by z cells (dst(x) += src(x + z)).
void add_shifted(ScalarField& dst, const ScalarField& src, const int z[3]) {
    const TorusGrid& g = dst.grid();
    const int n = g.n;
    if (g.d == 1) {
        auto w0 = wrap_table(n, z[0]);
        for (int i = 0; i < n; ++i) dst[static_cast<std::size_t>(i)] += src[static_cast<std::size_t>(w0[static_cast<std::size_t>(i)])];
        return;
    }
    if (g.d == 2) {
        auto w0 = wrap_table(n, z[0]);
        auto w1 = wrap_table(n, z[1]);
        for (int i0 = 0; i0 < n; ++i0) {
            std::size_t row = static_cast<std::size_t>(i0) * n;
            std::size_t srow = static_cast<std::size_t>(w0[static_cast<std::size_t>(i0)]) * n;
            for (int i1 = 0; i1 < n; ++i1)
                dst[row + static_cast<std::size_t>(i1)] += src[srow + static_cast<std::size_t>(w1[static_cast<std::size_t>(i1)])];
        }
        return;
    }
    auto w0 = wrap_table(n, z[0]);
    auto w1 = wrap_table(n, z[1]);
    auto w2 = wrap_table(n, z[2]);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    for (int i0 = 0; i0 < n; ++i0) {
        std::size_t p0 = static_cast<std::size_t>(i0) * nn;
        std::size_t s0 = static_cast<std::size_t>(w0[static_cast<std::size_t>(i0)]) * nn;
        for (int i1 = 0; i1 < n; ++i1) {
            std::size_t p1 = p0 + static_cast<std::size_t>(i1) * n;
            std::size_t s1 = s0 + static_cast<std::size_t>(w1[static_cast<std::size_t>(i1)]) * n;
            for (int i2 = 0; i2 < n; ++i2)
                dst[p1 + static_cast<std::size_t>(i2)] += src[s1 + static_cast<std::size_t>(w2[static_cast<std::size_t>(i2)])];
        }
    }
}

} // namespace

std::vector<double> maximal_radius_ladder(const TorusGrid& g) {
    std::vector<double> radii;
    for (double r = g.spacing(); r <= 0.5 + 1e-15; r *= 2.0) radii.push_back(r);
    return radii;
}

ScalarField ball_average(const ScalarField& f, double r) {
    const TorusGrid& g = f.grid();
    if (!(r >= 0.0)) throw ConfigError("ball_average: radius must be nonnegative");
    ScalarField absf(g);
    for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f[i]);
    auto mask = offsets_up_to(g, r);
    if (mask.empty()) return absf; // only possible for r < h with the origin excluded; degenerate cell
    ScalarField sum(g, 0.0);
    for (const Offset& o : mask) add_shifted(sum, absf, o.z);
    const double count = static_cast<double>(mask.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= count;
    return sum;
}

ScalarField maximal_function(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    ScalarField absf(g);
    for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f[i]);

    ScalarField best = absf; // degenerate single-cell ball
    ScalarField sum = absf;  // running mask sum; starts with the origin cell
    double count = 1.0;

    auto ladder = maximal_radius_ladder(g);
    auto all = offsets_up_to(g, ladder.back());
    std::size_t next = 0;
    for (double r : ladder) {
        const double cap = r * r + 1e-15;
        while (next < all.size() && all[next].r2 <= cap) {
            if (!(all[next].z[0] == 0 && all[next].z[1] == 0 && all[next].z[2] == 0))
                add_shifted(sum, absf, all[next].z);
            ++next;
        }
        count = static_cast<double>(next); // the origin is all[0]
        for (std::size_t i = 0; i < sum.size(); ++i)
            best[i] = std::max(best[i], sum[i] / count);
    }
    return best;
}

ScalarField dh_operator(const ScalarField& gm, double h) {
    const TorusGrid& g = gm.grid();
    if (!(h > 0.0)) throw ConfigError("dh_operator: radius must be positive");
    const double sp = g.spacing();
    const int d = g.d;

    // Tensor Gauss-Legendre rule on the cell [-sp/2, sp/2]^d. Four points per
    // axis (sixteen in d = 1) keep every node off the cell center, where the
    // integrand is singular for d >= 2.
    const int q = (d == 1) ? 16 : 4;
    std::vector<double> gx(static_cast<std::size_t>(q)), gw(static_cast<std::size_t>(q));
    if (q == 4) {
        const double x0 = 0.3399810435848563, x1 = 0.8611363115940526;
        const double w0 = 0.6521451548625461, w1 = 0.3478548451374538;
        gx = {-x1, -x0, x0, x1};
        gw = {w1, w0, w0, w1};
    } else {
        // 16-point Gauss-Legendre nodes/weights on [-1, 1].
        const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                              0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
        const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};
        for (int i = 0; i < 8; ++i) {
            gx[static_cast<std::size_t>(7 - i)] = -xs[i];
            gx[static_cast<std::size_t>(8 + i)] = xs[i];
            gw[static_cast<std::size_t>(7 - i)] = ws[i];
            gw[static_cast<std::size_t>(8 + i)] = ws[i];
        }
    }
    // Scale to the cell and normalize total weight to 1 (cell average).
    double wtot = 0.0;
    for (double w : gw) wtot += w;
    for (auto& w : gw) w /= wtot;
    for (auto& x : gx) x *= 0.5 * sp;

    const double reach = h + sp; // beyond this the cell cannot meet the ball
    ScalarField kf(g, 0.0);
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        std::array<double, 3> c{0.0, 0.0, 0.0};
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            c[static_cast<std::size_t>(a)] = signed_cell(idx[a], g.n) * sp;
            r2 += c[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(a)];
        }
        if (r2 > reach * reach) return;
        double acc = 0.0;
        auto point = [&](double za, double zb, double zc, double wt) {
            double rr = za * za + zb * zb + zc * zc;
            if (rr > h * h) return;
            double r = std::sqrt(rr);
            double kappa;
            if (d == 1) kappa = 1.0 / h;
            else if (d == 2) kappa = 1.0 / (h * r);
            else kappa = 1.0 / (h * rr);
            acc += wt * kappa;
        };
        if (d == 1) {
            for (int i = 0; i < q; ++i)
                point(c[0] + gx[static_cast<std::size_t>(i)], 0.0, 0.0, gw[static_cast<std::size_t>(i)]);
        } else if (d == 2) {
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    point(c[0] + gx[static_cast<std::size_t>(i)], c[1] + gx[static_cast<std::size_t>(j)], 0.0,
                          gw[static_cast<std::size_t>(i)] * gw[static_cast<std::size_t>(j)]);
        } else {
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    for (int l = 0; l < q; ++l)
                        point(c[0] + gx[static_cast<std::size_t>(i)], c[1] + gx[static_cast<std::size_t>(j)],
                              c[2] + gx[static_cast<std::size_t>(l)],
                              gw[static_cast<std::size_t>(i)] * gw[static_cast<std::size_t>(j)] * gw[static_cast<std::size_t>(l)]);
        }
        kf[lin] = acc;
    });
    return convolve(gm, kf);
}

ScalarField gradient_magnitude(const VectorField& u) {
    const TorusGrid& g = u.grid();
    ScalarField out(g, 0.0);
    for (int a = 0; a < g.d; ++a) {
        for (int b = 0; b < g.d; ++b) {
            ScalarField dba = derivative(u[a], b);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += dba[i] * dba[i];
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
    return out;
}

ScalarField gradient_magnitude(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    ScalarField out(g, 0.0);
    for (int b = 0; b < g.d; ++b) {
        ScalarField db = derivative(f, b);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += db[i] * db[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
    return out;
}

double maximal_inequality_constant(const ScalarField& f, Rng& rng, int npairs) {
    const TorusGrid& g = f.grid();
    ScalarField mg = maximal_function(gradient_magnitude(f));
    const double h = g.spacing();
    const double tiny = 1e-14 * std::max(max_abs(f), 1.0);
    double worst = 0.0;
    for (int p = 0; p < npairs; ++p) {
        std::array<int, 3> xi{0, 0, 0}, yi{0, 0, 0};
        for (int a = 0; a < g.d; ++a) {
            xi[static_cast<std::size_t>(a)] = rng.uniform_int(0, g.n - 1);
            yi[static_cast<std::size_t>(a)] = rng.uniform_int(0, g.n - 1);
        }
        std::size_t il = f.index(std::span<const int>(xi.data(), static_cast<std::size_t>(g.d)));
        std::size_t jl = f.index(std::span<const int>(yi.data(), static_cast<std::size_t>(g.d)));
        if (il == jl) continue;
        double dist2 = 0.0;
        for (int a = 0; a < g.d; ++a) {
            double z = signed_cell(yi[static_cast<std::size_t>(a)] - xi[static_cast<std::size_t>(a)], g.n) * h;
            dist2 += z * z;
        }
        double denom = std::sqrt(dist2) * (mg[il] + mg[jl]);
        if (denom < tiny) continue;
        worst = std::max(worst, std::abs(f[il] - f[jl]) / denom);
    }
    return worst;
}

} // namespace nslab
