#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoflow/manifold.hpp"

namespace geoflow {

enum class PotentialKind {
    power_law,             // g(th^2) = th^beta / beta
    quadratic_plus_quartic,// g(th^2) = w0 th^2/2 + w1 th^4/4
    truncated_power_law,   // power-law tail switched off inside radius zeta
    custom_table,          // monotone-cubic interpolant of g' samples
};

std::string to_string(PotentialKind kind);

// Interaction profile g as a function of squared distance s = th^2.
// All evaluations go through g_value / g_prime below.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::power_law;
    double beta = 2.0;                    // power_law, truncated_power_law
    double zeta = 0.0;                    // dead-zone radius (truncated)
    double weights[2] = {1.0, 1.0};       // quadratic_plus_quartic
    std::vector<double> table_s;          // custom_table: s sample locations
    std::vector<double> table_gprime;     // custom_table: g'(s) samples
};

void validate(const PotentialSpec& p);

double g_value(const PotentialSpec& p, double s);
double g_prime(const PotentialSpec& p, double s);

// Attraction structure detected from a dense scan of g' over
// (0, min(2 r_c, r_check)):
//   strong          g' > 0 everywhere on the scan
//   weak            g' == 0 exactly on a dead zone [0, zeta], zeta < r_w/2,
//                   and > 0 beyond it
//   attractive_only g' >= 0 but fits neither shape
// Any negative g' on the scan is a usage error (not attractive).
enum class AttractionClass { strong, weak, attractive_only };

struct AttractivenessClass {
    AttractionClass cls = AttractionClass::strong;
    std::optional<double> zeta;  // dead-zone radius for weak
};

// r_check caps the scan on backends with unbounded r_c; callers that know
// the initial support should pass 4x its diameter.
AttractivenessClass classify(const PotentialSpec& p,
                             const ManifoldDescriptor& m,
                             double r_check = 16.0);

// Monotonicity condition needed by the pairwise-contraction machinery:
// th / sin(sqrt(mu) th) * g'(th^2) nondecreasing for mu > 0, plain g'(th^2)
// nondecreasing otherwise, scanned on (0, min(2 r_c, r_check)) with slack
// 1e-12 per grid step.  r only sanity-checks the caller's ball: 0 < r < r_c.
bool admissible_kc(const PotentialSpec& p, const ManifoldDescriptor& m,
                   double r, double r_check = 16.0);

// Radii within which geodesic balls are well-behaved:
//   r_w = min(inj/2, pi / (2 sqrt(mu)))   (balls strongly convex)
//   r_c = min(inj/2, pi / (4 sqrt(mu)))   (contraction estimates valid)
// with 1/sqrt(mu) = +inf for mu <= 0.
struct Radii {
    double r_w;
    double r_c;
};
Radii radii(const ManifoldDescriptor& m);

// Curvature prefactor of the contraction bound on a ball of radius
// r < r_c: sin(2 sqrt(mu) (r_c - r)) for mu > 0, else 1.
double c_mu(const ManifoldDescriptor& m, double r);

// 2 g'(d^2) evaluated from the distance itself; integer power-law
// exponents avoid pow() in the pair sweep.
class PairWeightEval {
public:
    explicit PairWeightEval(const PotentialSpec& p);
    double operator()(double d) const {
        if (int_exp_ >= 0) {
            double w = 1.0;
            double b = d;
            for (int e = int_exp_; e > 0; e >>= 1) {
                if (e & 1) w *= b;
                b *= b;
            }
            return w;
        }
        return 2.0 * g_prime(*spec_, d * d);
    }

private:
    const PotentialSpec* spec_;
    int int_exp_ = -1;  // beta - 2 when a small nonnegative integer
};

}  // namespace geoflow
