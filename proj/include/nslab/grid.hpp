#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nslab/errors.hpp"

namespace nslab {

/**
 * Uniform periodic grid on the unit torus [0,1)^d.
 *
 * Node coordinates are x_j = j/n per axis; row-major storage with the last
 * axis fastest. n must be a power of two (the transform layer relies on it
 * and the dyadic ladders of the diagnostics assume it).
 */
struct TorusGrid {
    int d = 1;
    int n = 0;

    TorusGrid() = default;
    TorusGrid(int d_, int n_) : d(d_), n(n_) {
        if (d < 1 || d > 3) throw ConfigError("grid dimension must be 1, 2, or 3");
        if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("grid points per axis must be a power of two >= 2");
    }

    double spacing() const { return 1.0 / n; }
    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }
    // Hermitian (real-to-complex) storage: last axis truncated to n/2+1.
    std::size_t spectral_size() const {
        std::size_t s = static_cast<std::size_t>(n) / 2 + 1;
        for (int a = 0; a < d - 1; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }

    bool operator==(const TorusGrid& o) const { return d == o.d && n == o.n; }
};

/** Real scalar samples on a TorusGrid; finite values only. */
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid_(g), v_(g.size(), fill) {}

    const TorusGrid& grid() const { return grid_; }
    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::size_t size() const { return v_.size(); }

    // (i0,..,i_{d-1}) -> linear index, last axis fastest; indices taken mod n.
    std::size_t index(std::span<const int> idx) const {
        std::size_t lin = 0;
        for (int a = 0; a < grid_.d; ++a) {
            int i = idx[a] % grid_.n;
            if (i < 0) i += grid_.n;
            lin = lin * grid_.n + static_cast<std::size_t>(i);
        }
        return lin;
    }
    double at(std::span<const int> idx) const { return v_[index(idx)]; }

    void check_finite(const char* who) const {
        for (double x : v_)
            if (!std::isfinite(x)) throw RuntimeError(std::string(who) + ": non-finite field value");
    }

private:
    TorusGrid grid_;
    std::vector<double> v_;
};

/** d scalar components sharing one grid. */
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const TorusGrid& g) : grid_(g), comp_(g.d, ScalarField(g)) {}

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.d; }
    ScalarField& operator[](int c) { return comp_[static_cast<std::size_t>(c)]; }
    const ScalarField& operator[](int c) const { return comp_[static_cast<std::size_t>(c)]; }

private:
    TorusGrid grid_;
    std::vector<ScalarField> comp_;
};

/**
 * Spectral counterpart of a ScalarField under the real-to-complex transform.
 * Coefficient convention: c(k) = (1/n^d) sum_x f(x) exp(-2*pi*i k.x), stored
 * on the half lattice (last-axis frequencies 0..n/2). Physical frequencies
 * are 2*pi*k, k integer.
 */
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const TorusGrid& g)
        : grid_(g), c_(g.spectral_size(), std::complex<double>(0.0, 0.0)) {}

    const TorusGrid& grid() const { return grid_; }
    std::span<std::complex<double>> coeffs() { return c_; }
    std::span<const std::complex<double>> coeffs() const { return c_; }
    std::complex<double>& operator[](std::size_t i) { return c_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return c_[i]; }
    std::size_t size() const { return c_.size(); }

private:
    TorusGrid grid_;
    std::vector<std::complex<double>> c_;
};

// Iteration over the stored (Hermitian) frequency lattice. Calls
// fn(linear_index, k) with k the integer frequency vector (k[a] in
// [-n/2, n/2) for a < d-1, k[d-1] in [0, n/2]).
template <typename Fn>
void for_each_freq(const TorusGrid& g, Fn&& fn) {
    const int n = g.n;
    const int last = n / 2 + 1;
    std::array<int, 3> k{0, 0, 0};
    if (g.d == 1) {
        for (int i = 0; i < last; ++i) {
            k[0] = i;
            fn(static_cast<std::size_t>(i), std::span<const int>(k.data(), 1));
        }
    } else if (g.d == 2) {
        std::size_t lin = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = (i0 <= n / 2) ? i0 : i0 - n;
            for (int i1 = 0; i1 < last; ++i1, ++lin) {
                k[1] = i1;
                fn(lin, std::span<const int>(k.data(), 2));
            }
        }
    } else {
        std::size_t lin = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = (i0 <= n / 2) ? i0 : i0 - n;
            for (int i1 = 0; i1 < n; ++i1) {
                k[1] = (i1 <= n / 2) ? i1 : i1 - n;
                for (int i2 = 0; i2 < last; ++i2, ++lin) {
                    k[2] = i2;
                    fn(lin, std::span<const int>(k.data(), 3));
                }
            }
        }
    }
}

// Hermitian weight of a stored coefficient: 2 when the conjugate lattice
// point is not itself stored (0 < k_last < n/2), else 1.
inline double hermitian_weight(const TorusGrid& g, std::span<const int> k) {
    int klast = k[g.d - 1];
    return (klast == 0 || klast == g.n / 2) ? 1.0 : 2.0;
}

// Periodic displacement of node index j from the origin, as a signed cell
// count in [-n/2, n/2).
inline int signed_cell(int j, int n) {
    int m = j % n;
    if (m < 0) m += n;
    return (m >= n / 2) ? m - n : m;
}

// Periodic distance of a node (multi-index) from the origin.
inline double torus_node_radius(const TorusGrid& g, std::span<const int> idx) {
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
        double z = signed_cell(idx[a], g.n) * g.spacing();
        r2 += z * z;
    }
    return std::sqrt(r2);
}

// Calls fn(linear_index, idx) for every node, idx the integer multi-index.
template <typename Fn>
void for_each_node(const TorusGrid& g, Fn&& fn) {
    const int n = g.n;
    std::array<int, 3> idx{0, 0, 0};
    if (g.d == 1) {
        for (int i0 = 0; i0 < n; ++i0) {
            idx[0] = i0;
            fn(static_cast<std::size_t>(i0), std::span<const int>(idx.data(), 1));
        }
    } else if (g.d == 2) {
        std::size_t lin = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            idx[0] = i0;
            for (int i1 = 0; i1 < n; ++i1, ++lin) {
                idx[1] = i1;
                fn(lin, std::span<const int>(idx.data(), 2));
            }
        }
    } else {
        std::size_t lin = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            idx[0] = i0;
            for (int i1 = 0; i1 < n; ++i1) {
                idx[1] = i1;
                for (int i2 = 0; i2 < n; ++i2, ++lin) {
                    idx[2] = i2;
                    fn(lin, std::span<const int>(idx.data(), 3));
                }
            }
        }
    }
}

// Evaluates fn(x) at every node, x the coordinate vector in [0,1)^d.
template <typename Fn>
ScalarField sample(const TorusGrid& g, Fn&& fn) {
    ScalarField f(g);
    const double h = g.spacing();
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < g.d; ++a) x[static_cast<std::size_t>(a)] = idx[a] * h;
        f[lin] = fn(std::span<const double>(x.data(), static_cast<std::size_t>(g.d)));
    });
    return f;
}

// Circular shift by whole cells: result(x) = f(x + cells*h).
ScalarField shift_field(const ScalarField& f, std::span<const int> cells);

// ---- pointwise reductions; fixed (linear) summation order, bit-stable ----

inline double field_sum(const ScalarField& f) {
    // Kahan compensation: kernel fields span many orders of magnitude and
    // normalized masses are checked to 1e-14, tighter than a naive sum holds.
    double s = 0.0, c = 0.0;
    for (double x : f.values()) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}
inline double mean(const ScalarField& f) { return field_sum(f) / static_cast<double>(f.size()); }
// Integral over the unit torus: cell volume is 1/n^d.
inline double integral(const ScalarField& f) { return mean(f); }
inline double max_abs(const ScalarField& f);
inline double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p)) return max_abs(f);
    double s = 0.0;
    for (double x : f.values()) s += std::pow(std::abs(x), p);
    return std::pow(s / static_cast<double>(f.size()), 1.0 / p);
}
inline double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return std::sqrt(s / static_cast<double>(f.size()));
}
inline double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}
inline double min_value(const ScalarField& f) {
    double m = f.size() ? f[0] : 0.0;
    for (double x : f.values()) m = std::min(m, x);
    return m;
}
inline double max_value(const ScalarField& f) {
    double m = f.size() ? f[0] : 0.0;
    for (double x : f.values()) m = std::max(m, x);
    return m;
}

} // namespace nslab
