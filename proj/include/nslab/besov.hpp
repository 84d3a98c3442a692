#pragma once

#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

/**
 * Dyadic frequency decomposition f = sum_j f_j. Block j is cut by the
 * difference of two smooth radial lowpass symbols, so its spectrum lives in
 * the open annulus 2^{j-1} < |k| < 2^{j+1} (block 0: the ball |k| < 2).
 * The symbols telescope to 1 on every stored mode, making reconstruction
 * exact up to transform round-off. A single mode with |k| = 2^j lands
 * entirely in block j.
 */
std::vector<ScalarField> littlewood_paley(const ScalarField& f);

/**
 * Besov norm || 2^{sj} ||f_j||_p ||_{l^q} over the dyadic blocks.
 * p, q in [1, infinity], infinity meaning the sup over blocks.
 */
double besov_norm(const ScalarField& f, double s, double p, double q);

// Bessel-potential Sobolev norm ||(1 - Lap)^{s/2} f||_p, multiplier
// (1 + 4 pi^2 |k|^2)^{s/2}.
double sobolev_norm(const ScalarField& f, double s, double p);

} // namespace nslab
