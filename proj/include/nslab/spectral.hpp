#pragma once

#include <functional>

#include "nslab/fft.hpp"
#include "nslab/grid.hpp"

namespace nslab {

// Frequency-space multiplier: receives the integer frequency vector k
// (physical frequency 2*pi*k) and returns a complex factor.
using Multiplier = std::function<std::complex<double>(std::span<const int>)>;

/**
 * f -> inverse_fft(m(k) * forward_fft(f)).
 *
 * The multiplier must be finite everywhere on the stored lattice (NaN or
 * infinity is rejected) and must state its k=0 value explicitly; nothing is
 * filled in on its behalf.
 */
ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m);
SpectralField apply_multiplier(const SpectralField& c, const Multiplier& m);

// Partial derivative along one axis (exact Fourier differentiation). The
// Nyquist mode along that axis is zeroed: its derivative has no consistent
// sign on the half lattice, and keeping it breaks conjugate symmetry of
// odd-order operators.
ScalarField derivative(const ScalarField& f, int axis);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& u);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& u);

// Solves Laplace(phi) = f - mean(f) with mean(phi) = 0.
ScalarField inverse_laplacian_zero_mean(const ScalarField& f);

// Leray/Helmholtz decomposition: returns the divergence-free part; the
// gradient part is u minus the result. Idempotent to round-off.
VectorField project_divergence_free(const VectorField& u);

/**
 * Periodic convolution normalized so that (f * g)(x) =
 * (1/n^d) sum_y f(y) g(x-y); in frequency space this is the plain product
 * of the 1/n^d-scaled coefficients. A kernel with unit mass (mean 1 on the
 * grid, i.e. integral 1) therefore maps constants to themselves.
 */
ScalarField convolve(const ScalarField& f, const ScalarField& kernel);

// Classical 2/3-rule: zero all coefficients with any |k_a| > n/3.
void dealias_23(SpectralField& c);
ScalarField dealias_23(const ScalarField& f);

// Parseval sum: sum_k w_k |c(k)|^2 over the stored half lattice
// (equals the mean of f^2 for c = forward_fft(f)).
double spectral_energy(const SpectralField& c);

} // namespace nslab
