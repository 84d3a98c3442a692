#include "nslab/squarefn.hpp"

#include <cmath>
#include <map>

#include "nslab/errors.hpp"
#include "nslab/fft.hpp"
#include "nslab/kernels.hpp"
#include "nslab/maximal.hpp"
#include "nslab/spectral.hpp"

namespace nslab {

namespace {

// Average of |y|^(1-d) over the cell centered at the origin, in units of
// spacing^(1-d): 1 in d=1, else a fixed constant from tensor quadrature.
double origin_cell_unit(int d) {
    if (d == 1) return 1.0;
    static const double cached[2] = {[] {
                                         std::vector<double> gx, gw;
                                         gauss_legendre(8, gx, gw);
                                         double acc = 0.0, wacc = 0.0;
                                         for (std::size_t i = 0; i < gx.size(); ++i)
                                             for (std::size_t j = 0; j < gx.size(); ++j) {
                                                 double x = 0.25 * gx[i], y = 0.25 * gx[j];
                                                 double w = gw[i] * gw[j];
                                                 acc += w / std::sqrt(x * x + y * y);
                                                 wacc += w;
                                             }
                                         return acc / wacc;
                                     }(),
                                     [] {
                                         std::vector<double> gx, gw;
                                         gauss_legendre(8, gx, gw);
                                         double acc = 0.0, wacc = 0.0;
                                         for (std::size_t i = 0; i < gx.size(); ++i)
                                             for (std::size_t j = 0; j < gx.size(); ++j)
                                                 for (std::size_t l = 0; l < gx.size(); ++l) {
                                                     double x = 0.25 * gx[i], y = 0.25 * gx[j],
                                                            z = 0.25 * gx[l];
                                                     double w = gw[i] * gw[j] * gw[l];
                                                     acc += w / (x * x + y * y + z * z);
                                                     wacc += w;
                                                 }
                                         return acc / wacc;
                                     }()};
    return cached[d - 2];
}

} // namespace

double h1_norm(const VectorField& u) {
    double acc = 0.0;
    for (int a = 0; a < u.dim(); ++a) {
        for (double v : u[a].values()) acc += v * v / static_cast<double>(u[a].size());
        for (int b = 0; b < u.dim(); ++b) {
            ScalarField da = derivative(u[a], b);
            for (double v : da.values()) acc += v * v / static_cast<double>(da.size());
        }
    }
    return std::sqrt(acc);
}

namespace {

// ||D_r u - shift_z D_r u||_{L^2} for every lattice offset z, radius r = |z|.
ScalarField shift_norm_table(const VectorField& u) {
    const TorusGrid& g = u.grid();
    const double sp = g.spacing();

    ScalarField gm = gradient_magnitude(u);
    SpectralField gmhat = forward_fft(gm);

    // Lattice offsets grouped by integer square radius (cell units).
    std::vector<long> m_of(g.size());
    std::map<long, std::vector<std::size_t>> groups;
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        long m = 0;
        for (int axis = 0; axis < g.d; ++axis) {
            long z = signed_cell(idx[axis], g.n);
            m += z * z;
        }
        m_of[lin] = m;
        if (m > 0) groups[m].push_back(lin);
    });

    const double c0 = origin_cell_unit(g.d) * std::pow(sp, 1.0 - static_cast<double>(g.d));

    // One autocorrelation per distinct radius gives every shift norm of that
    // radius: ||F - shift_z F||_2^2 = 2 AC(0) - 2 AC(z).
    ScalarField shift_norm(g, 0.0);
    ScalarField kappa(g, 0.0);
    for (const auto& [m, offsets] : groups) {
        const double r = std::sqrt(static_cast<double>(m)) * sp;
        for_each_node(g, [&](std::size_t lin, std::span<const int>) {
            long mz = m_of[lin];
            if (mz > m) {
                kappa[lin] = 0.0;
            } else if (mz == 0) {
                kappa[lin] = c0 / r;
            } else if (g.d == 1) {
                kappa[lin] = 1.0 / r;
            } else if (g.d == 2) {
                kappa[lin] = 1.0 / (r * std::sqrt(static_cast<double>(mz)) * sp);
            } else {
                kappa[lin] = 1.0 / (r * static_cast<double>(mz) * sp * sp);
            }
        });
        SpectralField khat = forward_fft(kappa);
        SpectralField power(g);
        for (std::size_t i = 0; i < power.size(); ++i) {
            std::complex<double> c = gmhat[i] * khat[i];
            power[i] = std::complex<double>(std::norm(c), 0.0);
        }
        ScalarField ac = inverse_fft(power);
        const double ac0 = ac[0];
        for (std::size_t lin : offsets)
            shift_norm[lin] = std::sqrt(std::max(0.0, 2.0 * (ac0 - ac[lin])));
    }
    return shift_norm;
}

// Log-scale quadrature over h in [h0, 1], matching the kernel scale average.
// Gauss nodes are interior, so every evaluation scale stays in (h0, 1).
double scale_average(const TorusGrid& g, const ScalarField& shift_norm, double h0, double a) {
    std::vector<double> gx, gw;
    gauss_legendre(40, gx, gw);
    const double s0 = std::log(h0);
    double total = 0.0;
    for (std::size_t q = 0; q < gx.size(); ++q) {
        double hq = std::exp(0.5 * s0 + 0.5 * (0.0 - s0) * gx[q]);
        double wq = 0.5 * (0.0 - s0) * gw[q];
        Kernel kbar = build_mollifier(g, hq, a);
        double inner = 0.0;
        for (std::size_t lin = 0; lin < g.size(); ++lin)
            inner += kbar.field[lin] * shift_norm[lin];
        total += wq * inner / static_cast<double>(g.size());
    }
    return total;
}

} // namespace

std::vector<double> square_function_sweep(const VectorField& u, std::span<const double> h0s,
                                          double a_exp) {
    const TorusGrid& g = u.grid();
    const double sp = g.spacing();
    if (h0s.empty()) throw ConfigError("square_function_sweep: empty h0 list");
    for (double h0 : h0s) {
        if (!(h0 > 0.0) || h0 > 0.5)
            throw ConfigError("square_function_sweep: h0 must lie in (0, 1/2]");
        if (h0 < sp) throw ConfigError("square_function_sweep: h0 below grid resolution");
    }
    const double a = a_exp > 0.0 ? a_exp : static_cast<double>(g.d) + 1.0;

    ScalarField table = shift_norm_table(u);
    std::vector<double> out;
    out.reserve(h0s.size());
    for (double h0 : h0s) out.push_back(scale_average(g, table, h0, a));
    return out;
}

double square_function_shift(const VectorField& u, double h0, double a_exp) {
    const double h[1] = {h0};
    return square_function_sweep(u, h, a_exp)[0];
}

} // namespace nslab
