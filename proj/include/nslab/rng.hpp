#pragma once

#include <cstdint>
#include <random>

#include "nslab/grid.hpp"

namespace nslab {

/**
 * Deterministic random source. All distribution code is written out here
 * rather than taken from <random>'s distributions, whose sequences are not
 * pinned by the standard; mt19937_64 itself is.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi_inclusive) {
        // Modulo bias is negligible for the small ranges used here and keeps
        // the draw count per call fixed (one), which matters for replay.
        std::uint64_t span = static_cast<std::uint64_t>(hi_inclusive - lo + 1);
        return lo + static_cast<int>(eng_() % span);
    }

    // Box-Muller with an explicit spare, two uniform draws per fresh pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/**
 * Smooth random scalar field: a real trigonometric polynomial with
 * independent Gaussian coefficients supported on |k_a| <= kmax, with an
 * exponential spectral taper exp(-(|k|/kmax)^2). Mean set to `mean`,
 * rescaled so max|f - mean| = amplitude (when positive).
 */
ScalarField random_smooth_field(const TorusGrid& g, Rng& rng, int kmax,
                                double mean = 0.0, double amplitude = 1.0);

// Integer-valued field: each node is uniform in {0, 1, ..., top}.
ScalarField random_integer_field(const TorusGrid& g, Rng& rng, int top);

VectorField random_smooth_vector(const TorusGrid& g, Rng& rng, int kmax, double amplitude = 1.0);

} // namespace nslab
