#include "nslab/oscillation.hpp"

#include <cmath>

#include "nslab/errors.hpp"

namespace nslab {

namespace {

// sum over x of pair(x_lin, y_lin) with y = x - z on the torus.
template <class Pair>
double pair_shift_sum(const TorusGrid& g, std::span<const int> z, Pair&& pair) {
    const int n = g.n;
    auto wrap = [n](int x, int s) {
        int y = x - s;
        return y < 0 ? y + n : y;
    };
    double acc = 0.0;
    if (g.d == 1) {
        for (int x0 = 0; x0 < n; ++x0)
            acc += pair(static_cast<std::size_t>(x0), static_cast<std::size_t>(wrap(x0, z[0])));
    } else if (g.d == 2) {
        const std::size_t un = static_cast<std::size_t>(n);
        for (int x0 = 0; x0 < n; ++x0) {
            std::size_t xr = static_cast<std::size_t>(x0) * un;
            std::size_t yr = static_cast<std::size_t>(wrap(x0, z[0])) * un;
            for (int x1 = 0; x1 < n; ++x1)
                acc += pair(xr + static_cast<std::size_t>(x1),
                            yr + static_cast<std::size_t>(wrap(x1, z[1])));
        }
    } else {
        const std::size_t un = static_cast<std::size_t>(n);
        for (int x0 = 0; x0 < n; ++x0) {
            std::size_t xp = static_cast<std::size_t>(x0) * un;
            std::size_t yp = static_cast<std::size_t>(wrap(x0, z[0])) * un;
            for (int x1 = 0; x1 < n; ++x1) {
                std::size_t xr = (xp + static_cast<std::size_t>(x1)) * un;
                std::size_t yr = (yp + static_cast<std::size_t>(wrap(x1, z[1]))) * un;
                for (int x2 = 0; x2 < n; ++x2)
                    acc += pair(xr + static_cast<std::size_t>(x2),
                                yr + static_cast<std::size_t>(wrap(x2, z[2])));
            }
        }
    }
    return acc;
}

// Drives the double sum: for every shift with kernel weight above threshold
// accumulates K(s) * inner(s); below-threshold shifts feed the reported
// truncation bound via pair_cap, an upper bound on a single pair value.
template <class Pair>
OscValue shift_engine(const ScalarField& rho, const Kernel& kernel, double pair_cap,
                      Pair&& pair) {
    const TorusGrid& g = rho.grid();
    if (!(kernel.field.grid() == g)) throw ConfigError("oscillation: kernel grid mismatch");
    const double thr = 1e-12 * max_value(kernel.field);
    const double nd = static_cast<double>(g.size());

    double acc = 0.0;
    std::size_t skipped = 0;
    for_each_node(g, [&](std::size_t s_lin, std::span<const int> s) {
        double K = kernel.field[s_lin];
        if (K < thr) {
            ++skipped;
            return;
        }
        acc += K * pair_shift_sum(g, s, pair);
    });
    OscValue out;
    out.value = acc / (nd * nd);
    out.truncation_bound = static_cast<double>(skipped) * thr * pair_cap / nd;
    return out;
}

} // namespace

OscValue osc_functional(const ScalarField& rho, const Kernel& kernel, double p) {
    if (!(p >= 1.0)) throw ConfigError("osc_functional: p must be >= 1");
    const double cap = std::pow(2.0 * max_abs(rho), p);
    const std::span<const double> r = rho.values();
    if (p == 1.0)
        return shift_engine(rho, kernel, cap,
                            [r](std::size_t x, std::size_t y) { return std::abs(r[x] - r[y]); });
    if (p == 2.0)
        return shift_engine(rho, kernel, cap, [r](std::size_t x, std::size_t y) {
            double d = r[x] - r[y];
            return d * d;
        });
    return shift_engine(rho, kernel, cap, [r, p](std::size_t x, std::size_t y) {
        return std::pow(std::abs(r[x] - r[y]), p);
    });
}

OscValue weighted_osc(const ScalarField& rho, const ScalarField& w, const Kernel& kernel,
                      const ChiSpec& chi, WeightForm form) {
    if (!(w.grid() == rho.grid())) throw ConfigError("weighted_osc: weight grid mismatch");
    if (min_value(w) < 0.0 || max_value(w) > 1.0)
        throw ConfigError("weighted_osc: weight must lie in [0,1]");
    const double chicap = chi(2.0 * max_abs(rho));
    const std::span<const double> r = rho.values();
    const std::span<const double> wv = w.values();
    if (form == WeightForm::sum)
        return shift_engine(rho, kernel, 2.0 * chicap, [&](std::size_t x, std::size_t y) {
            return chi(r[x] - r[y]) * (wv[x] + wv[y]);
        });
    return shift_engine(rho, kernel, chicap, [&](std::size_t x, std::size_t y) {
        return chi(r[x] - r[y]) * (wv[x] * wv[y]);
    });
}

OscValue thresholded_osc(const ScalarField& rho, const Kernel& kernel, const ChiSpec& chi,
                         double eta) {
    if (!(eta > 0.0)) throw ConfigError("thresholded_osc: eta must be positive");
    const double chicap = chi(2.0 * max_abs(rho));
    const std::span<const double> r = rho.values();
    return shift_engine(rho, kernel, chicap, [&](std::size_t x, std::size_t y) {
        if (r[x] < eta || r[y] < eta) return 0.0;
        return chi(r[x] - r[y]);
    });
}

} // namespace nslab
