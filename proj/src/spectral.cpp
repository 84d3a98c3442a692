#include "nslab/spectral.hpp"

#include <cmath>

namespace nslab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
} // namespace

SpectralField apply_multiplier(const SpectralField& c, const Multiplier& m) {
    SpectralField out(c.grid());
    bool bad = false;
    for_each_freq(c.grid(), [&](std::size_t lin, std::span<const int> k) {
        std::complex<double> w = m(k);
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) bad = true;
        out[lin] = w * c[lin];
    });
    if (bad) throw RuntimeError("apply_multiplier: non-finite multiplier value on the frequency lattice");
    return out;
}

ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m) {
    return inverse_fft(apply_multiplier(forward_fft(f), m));
}

ScalarField derivative(const ScalarField& f, int axis) {
    const int nyq = f.grid().n / 2;
    return apply_multiplier(f, [axis, nyq](std::span<const int> k) {
        if (std::abs(k[axis]) == nyq) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(0.0, kTwoPi * k[axis]);
    });
}

VectorField gradient(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    VectorField out(g);
    SpectralField c = forward_fft(f);
    const int nyq = g.n / 2;
    for (int a = 0; a < g.d; ++a) {
        SpectralField da = apply_multiplier(c, [a, nyq](std::span<const int> k) {
            if (std::abs(k[a]) == nyq) return std::complex<double>(0.0, 0.0);
            return std::complex<double>(0.0, kTwoPi * k[a]);
        });
        out[a] = inverse_fft(da);
    }
    return out;
}

ScalarField divergence(const VectorField& u) {
    const TorusGrid& g = u.grid();
    SpectralField acc(g);
    const int nyq = g.n / 2;
    for (int a = 0; a < g.d; ++a) {
        SpectralField c = forward_fft(u[a]);
        for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
            if (std::abs(k[a]) == nyq) return;
            acc[lin] += std::complex<double>(0.0, kTwoPi * k[a]) * c[lin];
        });
    }
    return inverse_fft(acc);
}

ScalarField laplacian(const ScalarField& f) {
    return apply_multiplier(f, [](std::span<const int> k) {
        double k2 = 0.0;
        for (int v : k) k2 += static_cast<double>(v) * v;
        return std::complex<double>(-kTwoPi * kTwoPi * k2, 0.0);
    });
}

VectorField laplacian(const VectorField& u) {
    VectorField out(u.grid());
    for (int a = 0; a < u.dim(); ++a) out[a] = laplacian(u[a]);
    return out;
}

ScalarField inverse_laplacian_zero_mean(const ScalarField& f) {
    return apply_multiplier(f, [](std::span<const int> k) {
        double k2 = 0.0;
        for (int v : k) k2 += static_cast<double>(v) * v;
        if (k2 == 0.0) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(-1.0 / (kTwoPi * kTwoPi * k2), 0.0);
    });
}

VectorField project_divergence_free(const VectorField& u) {
    const TorusGrid& g = u.grid();
    std::vector<SpectralField> c;
    c.reserve(static_cast<std::size_t>(g.d));
    for (int a = 0; a < g.d; ++a) c.push_back(forward_fft(u[a]));

    // u_hat - k (k.u_hat) / |k|^2; k=0 (the mean) is already divergence-free.
    std::vector<SpectralField> out;
    for (int a = 0; a < g.d; ++a) out.emplace_back(g);
    for_each_freq(g, [&](std::size_t lin, std::span<const int> k) {
        double k2 = 0.0;
        for (int v : k) k2 += static_cast<double>(v) * v;
        if (k2 == 0.0) {
            for (int a = 0; a < g.d; ++a) out[static_cast<std::size_t>(a)][lin] = c[static_cast<std::size_t>(a)][lin];
            return;
        }
        std::complex<double> kdot(0.0, 0.0);
        for (int a = 0; a < g.d; ++a) kdot += static_cast<double>(k[a]) * c[static_cast<std::size_t>(a)][lin];
        for (int a = 0; a < g.d; ++a)
            out[static_cast<std::size_t>(a)][lin] =
                c[static_cast<std::size_t>(a)][lin] - (static_cast<double>(k[a]) / k2) * kdot;
    });

    VectorField v(g);
    for (int a = 0; a < g.d; ++a) v[a] = inverse_fft(out[static_cast<std::size_t>(a)]);
    return v;
}

ScalarField convolve(const ScalarField& f, const ScalarField& kernel) {
    if (!(f.grid() == kernel.grid())) throw RuntimeError("convolve: grid mismatch");
    SpectralField a = forward_fft(f);
    SpectralField b = forward_fft(kernel);
    SpectralField c(f.grid());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
    return inverse_fft(c);
}

void dealias_23(SpectralField& c) {
    const int cut = c.grid().n / 3;
    for_each_freq(c.grid(), [&](std::size_t lin, std::span<const int> k) {
        for (int v : k)
            if (std::abs(v) > cut) {
                c[lin] = std::complex<double>(0.0, 0.0);
                return;
            }
    });
}

ScalarField dealias_23(const ScalarField& f) {
    SpectralField c = forward_fft(f);
    dealias_23(c);
    return inverse_fft(c);
}

double spectral_energy(const SpectralField& c) {
    double s = 0.0;
    for_each_freq(c.grid(), [&](std::size_t lin, std::span<const int> k) {
        s += hermitian_weight(c.grid(), k) * std::norm(c[lin]);
    });
    return s;
}

} // namespace nslab
