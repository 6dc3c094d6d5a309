#include "geoflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr int kMinWindowSamples = 10;
constexpr double kReliableR2 = 0.999;

RateFit fit_line(const std::vector<std::pair<double, double>>& series,
                 double window_fraction, FitModel model) {
    if (!(window_fraction > 0.0) || !(window_fraction <= 1.0))
        throw UsageError("window fraction must be in (0, 1]");
    const std::size_t n = series.size();
    const std::size_t take = std::max<std::size_t>(
        static_cast<std::size_t>(
            std::ceil(window_fraction * static_cast<double>(n))),
        1);
    if (take < kMinWindowSamples)
        throw UsageError("fit window has " + std::to_string(take) +
                         " samples; need at least " +
                         std::to_string(kMinWindowSamples));
    const std::size_t first = n - take;

    std::vector<double> xs(take), ys(take);
    for (std::size_t k = 0; k < take; ++k) {
        const auto& [t, y] = series[first + k];
        if (!(y > 0.0))
            throw UsageError("fit needs positive values in the window (got " +
                             std::to_string(y) + " at t = " +
                             std::to_string(t) + ")");
        if (model == FitModel::power && !(t > 0.0))
            throw UsageError("power fit needs t > 0 in the window");
        xs[k] = (model == FitModel::power) ? std::log(t) : t;
        ys[k] = std::log(y);
    }

    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < take; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= static_cast<double>(take);
    my /= static_cast<double>(take);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < take; ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw UsageError("fit window has no spread in the time variable");

    RateFit fit;
    fit.model = model;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.t_start = series[first].first;
    fit.t_end = series.back().first;
    const double ss_res = syy - fit.slope * sxy;
    // flat series fit exactly; otherwise 1 - SS_res / SS_tot
    fit.r_squared = (syy <= 1e-30) ? 1.0 : 1.0 - ss_res / syy;
    fit.reliable = fit.r_squared >= kReliableR2;
    return fit;
}

}  // namespace

RateFit fit_exponential(const std::vector<std::pair<double, double>>& series,
                        double window_fraction) {
    return fit_line(series, window_fraction, FitModel::exponential);
}

RateFit fit_power(const std::vector<std::pair<double, double>>& series,
                  double window_fraction) {
    return fit_line(series, window_fraction, FitModel::power);
}

double RatePrediction::envelope(double t) const {
    if (model == FitModel::exponential)
        return d0 * std::exp(-bound_rate * t);
    return d0 * std::pow(1.0 + envelope_coeff * t, exponent);
}

RatePrediction predicted_rate(const PotentialSpec& p,
                              const ManifoldDescriptor& m, double r,
                              double d0) {
    if (p.kind != PotentialKind::power_law)
        throw UsageError("rate prediction covers power_law potentials only");
    validate(p);
    if (!(d0 >= 0.0)) throw UsageError("predicted_rate needs d0 >= 0");
    constexpr double alpha = 0.5;  // g'(th^2) = th^(beta-2) / 2
    const double cmu = c_mu(m, r);
    RatePrediction out;
    out.d0 = d0;
    if (p.beta == 2.0) {
        out.model = FitModel::exponential;
        out.bound_rate = alpha * cmu;
        return out;
    }
    out.model = FitModel::power;
    out.exponent = -1.0 / (p.beta - 2.0);
    out.envelope_coeff = alpha * (p.beta - 2.0) *
                         std::pow(0.5 * d0, p.beta - 2.0) * cmu;
    return out;
}

}  // namespace geoflow
