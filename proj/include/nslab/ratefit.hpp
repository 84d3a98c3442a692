#pragma once

#include <span>
#include <string>
#include <vector>

namespace nslab {

/**
 * Decay law fitted against the scale ladder:
 *   inverse_log_power:  value ~ C / |log h0|^theta
 *   inverse_power:      value ~ C * h0^theta
 */
enum class RateModel { inverse_log_power, inverse_power };

struct RateFit {
    RateModel model = RateModel::inverse_log_power;
    double theta = 0.0;            // fitted decay exponent
    double amplitude = 0.0;        // fitted C
    double log_residual_rms = 0.0; // rms of log(value) - log(fit)
    bool flat = false;             // values varied by under 5%: theta unreliable

    std::vector<double> h0;     // ladder as given
    std::vector<double> values; // samples as given
    std::vector<double> fitted; // model evaluated on the ladder

    std::string to_text() const; // deterministic multi-line summary
};

/**
 * Ordinary least squares of log(values) against the model abscissa
 * (log|log h0| or |log h0|). Values are taken as-is: divide by a kernel
 * mass first when a normalized rate is wanted.
 *
 * Requires >= 4 samples, h0 in (0,1), positive values. Values that rise by
 * more than 25% against the trend direction are rejected as degenerate
 * rather than silently fitted; a <5% total spread sets `flat` instead of
 * fitting noise.
 */
RateFit fit_rate(std::span<const double> h0, std::span<const double> values, RateModel model);

} // namespace nslab
