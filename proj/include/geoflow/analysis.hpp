#pragma once

#include <utility>
#include <vector>

#include "geoflow/potential.hpp"

namespace geoflow {

enum class FitModel { exponential, power };

// Least-squares line through the transformed series:
//   exponential:  ln y  vs  t      (slope = decay rate)
//   power:        ln y  vs  ln t   (slope = algebraic rate)
// fitted over the trailing `window_fraction` of the samples.
struct RateFit {
    FitModel model = FitModel::exponential;
    double slope = 0.0;
    double intercept = 0.0;
    double t_start = 0.0;  // window actually used
    double t_end = 0.0;
    double r_squared = 0.0;
    bool reliable = false;  // r_squared >= 0.999
};

// series holds (t, value) pairs; the window must keep >= 10 samples with
// value > 0 (and t > 0 for the power model).
RateFit fit_exponential(const std::vector<std::pair<double, double>>& series,
                        double window_fraction = 0.25);
RateFit fit_power(const std::vector<std::pair<double, double>>& series,
                  double window_fraction = 0.25);

// Decay predicted by the contraction theory for a power-law potential on a
// ball of radius r (with alpha = 1/2 from g'(th^2) = th^(beta-2)/2):
//   beta == 2: diameter <= d0 exp(-alpha C_mu t)
//   beta  > 2: diameter <= d0 (1 + alpha (beta-2) (d0/2)^(beta-2) C_mu t)
//                              ^(-1/(beta-2))
struct RatePrediction {
    FitModel model = FitModel::exponential;
    double bound_rate = 0.0;      // alpha C_mu (exponential model)
    double exponent = 0.0;        // -1/(beta-2)  (power model)
    double d0 = 0.0;
    double envelope_coeff = 0.0;  // alpha (beta-2) (d0/2)^(beta-2) C_mu

    double envelope(double t) const;
};

RatePrediction predicted_rate(const PotentialSpec& p,
                              const ManifoldDescriptor& m, double r,
                              double d0);

}  // namespace geoflow
