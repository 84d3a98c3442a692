#include "nslab/ratefit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "nslab/errors.hpp"

namespace nslab {

namespace {

double abscissa(double h0, RateModel model) {
    double L = std::abs(std::log(h0));
    return model == RateModel::inverse_log_power ? std::log(L) : L;
}

void append_num(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    s += buf;
}

} // namespace

RateFit fit_rate(std::span<const double> h0, std::span<const double> values, RateModel model) {
    if (h0.size() != values.size()) throw ConfigError("fit_rate: ladder/value size mismatch");
    if (h0.size() < 4) throw ConfigError("fit_rate: need at least 4 samples");
    for (double h : h0)
        if (!(h > 0.0) || h >= 1.0) throw ConfigError("fit_rate: h0 must lie in (0,1)");
    for (double v : values)
        if (!(v > 0.0)) throw ConfigError("fit_rate: values must be positive");

    const std::size_t m = h0.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return abscissa(h0[i], model) < abscissa(h0[j], model); });

    // Decay means values shrink as the abscissa grows; a >25% rise between
    // neighbors is not a rate, it is a broken measurement.
    for (std::size_t i = 0; i + 1 < m; ++i) {
        double prev = values[order[i]], next = values[order[i + 1]];
        if (next > 1.25 * prev)
            throw RuntimeError("fit_rate: values non-monotone beyond tolerance, refusing degenerate fit");
    }

    RateFit fit;
    fit.model = model;
    fit.h0.assign(h0.begin(), h0.end());
    fit.values.assign(values.begin(), values.end());

    double vmax = *std::max_element(fit.values.begin(), fit.values.end());
    double vmin = *std::min_element(fit.values.begin(), fit.values.end());
    fit.flat = vmax < 1.05 * vmin;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double x = abscissa(h0[i], model), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dm = static_cast<double>(m);
    double denom = dm * sxx - sx * sx;
    if (!(std::abs(denom) > 1e-12 * dm * sxx) || denom == 0.0)
        throw ConfigError("fit_rate: ladder abscissas coincide");
    double slope = (dm * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / dm;

    fit.theta = -slope;
    fit.amplitude = std::exp(intercept);
    fit.fitted.resize(m);
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double x = abscissa(h0[i], model);
        double logfit = intercept + slope * x;
        fit.fitted[i] = std::exp(logfit);
        double r = std::log(values[i]) - logfit;
        rss += r * r;
    }
    fit.log_residual_rms = std::sqrt(rss / dm);
    return fit;
}

std::string RateFit::to_text() const {
    std::string s = "rate fit: value ~ C";
    s += (model == RateModel::inverse_log_power) ? " / |log h0|^theta" : " * h0^theta";
    s += "\n  theta=";
    append_num(s, theta);
    s += " C=";
    append_num(s, amplitude);
    s += " log_residual_rms=";
    append_num(s, log_residual_rms);
    s += flat ? " flat=yes" : " flat=no";
    s += "\n";
    for (std::size_t i = 0; i < h0.size(); ++i) {
        s += "  h0=";
        append_num(s, h0[i]);
        s += " value=";
        append_num(s, values[i]);
        s += " fitted=";
        append_num(s, fitted[i]);
        s += "\n";
    }
    return s;
}

} // namespace nslab
