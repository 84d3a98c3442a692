#pragma once

#include "nslab/grid.hpp"

namespace nslab {

/**
 * Real-to-complex transform pair on a TorusGrid.
 *
 * forward_fft returns coefficients scaled by 1/n^d, so that
 *   - a constant field c transforms to c at k=0 and zero elsewhere,
 *   - pointwise products in frequency space realize periodic convolution
 *     with the (1/n^d)-normalized discrete convolution (see spectral.hpp),
 *   - Parseval reads (1/n^d) sum_x f(x)^2 = sum_k w_k |c(k)|^2 with the
 *     Hermitian weights w_k.
 *
 * inverse_fft is the exact inverse of forward_fft. Plans are created once
 * per (d, n, direction) and cached behind a mutex; execution itself is
 * serial and deterministic.
 */
SpectralField forward_fft(const ScalarField& f);
ScalarField inverse_fft(const SpectralField& c);

} // namespace nslab
