#include "nslab/besov.hpp"

#include <cmath>
#include <limits>

#include "nslab/errors.hpp"
#include "nslab/fft.hpp"
#include "nslab/kernels.hpp"
#include "nslab/spectral.hpp"

namespace nslab {

namespace {

// Smooth radial lowpass: 1 for |k| <= 2^j, 0 for |k| >= 2^{j+1}.
double lowpass(double r, int j) {
    return 1.0 - smoothstep01(r * std::pow(2.0, -j) - 1.0);
}

double freq_radius(std::span<const int> k) {
    double r2 = 0.0;
    for (int v : k) r2 += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(r2);
}

} // namespace

std::vector<ScalarField> littlewood_paley(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    const double rmax = std::sqrt(static_cast<double>(g.d)) * (g.n / 2.0);
    int top = 0;
    while (std::pow(2.0, top) < rmax) ++top; // lowpass `top` passes every mode

    SpectralField fhat = forward_fft(f);
    std::vector<ScalarField> blocks;
    blocks.reserve(static_cast<std::size_t>(top) + 1);
    for (int j = 0; j <= top; ++j) {
        SpectralField cut(g);
        for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
            double r = freq_radius(k);
            double m = (j == 0) ? lowpass(r, 0) : lowpass(r, j) - lowpass(r, j - 1);
            cut[lin] = fhat[lin] * m;
        });
        blocks.push_back(inverse_fft(cut));
    }
    return blocks;
}

double besov_norm(const ScalarField& f, double s, double p, double q) {
    if (!(p >= 1.0) && !std::isinf(p)) throw ConfigError("besov_norm: p must be >= 1 or infinity");
    if (!(q >= 1.0) && !std::isinf(q)) throw ConfigError("besov_norm: q must be >= 1 or infinity");
    std::vector<ScalarField> blocks = littlewood_paley(f);
    double acc = 0.0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        double term = std::pow(2.0, s * static_cast<double>(j)) * lp_norm(blocks[j], p);
        if (std::isinf(q))
            acc = std::max(acc, term);
        else
            acc += std::pow(term, q);
    }
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

double sobolev_norm(const ScalarField& f, double s, double p) {
    constexpr double two_pi = 6.28318530717958647692;
    ScalarField lifted = apply_multiplier(f, [s](std::span<const int> k) {
        double r2 = 0.0;
        for (int v : k) r2 += static_cast<double>(v) * static_cast<double>(v);
        return std::complex<double>(std::pow(1.0 + two_pi * two_pi * r2, 0.5 * s), 0.0);
    });
    return lp_norm(lifted, p);
}

} // namespace nslab
