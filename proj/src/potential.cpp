#include "geoflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHingeEps = 1e-6;   // smoothing width for sub-cubic tails
constexpr int kScanSamples = 10000;  // classification / monotonicity grid

double require_nonneg_s(double s, const char* what) {
    if (!(s >= 0.0))
        throw UsageError(std::string(what) +
                         " takes a squared distance, got a negative value");
    return s;
}

double ipow(double b, int e) {
    double w = 1.0;
    for (; e > 0; e >>= 1) {
        if (e & 1) w *= b;
        b *= b;
    }
    return w;
}

// s^q for the integer and half-integer exponents the hot pair loops use;
// falls back to pow() otherwise.
double pow_fast(double s, double q) {
    if (q < 0.0 && s > 0.0) return 1.0 / pow_fast(s, -q);
    const int iq = static_cast<int>(q);
    if (static_cast<double>(iq) == q && iq >= 0 && iq <= 16)
        return ipow(s, iq);
    const double twice = 2.0 * q;
    const int itw = static_cast<int>(twice);
    if (static_cast<double>(itw) == twice && itw >= 1 && itw <= 32)
        return ipow(std::sqrt(s), itw);
    return std::pow(s, q);
}

// Smoothed hinge used for truncated tails with beta < 3, where the plain
// (r - zeta)^(beta-2) profile would not be locally Lipschitz at zeta.
double smooth_hinge(double x) { return x * x / (x + kHingeEps); }

// --- custom_table: local monotone cubic (Fritsch-Carlson limited) --------

struct TableInterval {
    double s0, s1, y0, y1, m0, m1;
};

double secant(const PotentialSpec& p, std::size_t i) {
    return (p.table_gprime[i + 1] - p.table_gprime[i]) /
           (p.table_s[i + 1] - p.table_s[i]);
}

// Limited tangent at node i; depends only on the two adjacent secants, so
// it can be evaluated locally.
double table_tangent(const PotentialSpec& p, std::size_t i) {
    const std::size_t n = p.table_s.size();
    if (n == 2) return secant(p, 0);
    auto endpoint = [&](std::size_t a, std::size_t b) {
        const double h0 = p.table_s[b] - p.table_s[a];
        const double h1 = p.table_s[b + 1] - p.table_s[b];
        const double d0 = secant(p, a);
        const double d1 = secant(p, b);
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
            return 3.0 * d0;
        return m;
    };
    if (i == 0) return endpoint(0, 0);
    if (i == n - 1) {
        // mirror of the left endpoint rule
        const double h0 = p.table_s[n - 1] - p.table_s[n - 2];
        const double h1 = p.table_s[n - 2] - p.table_s[n - 3];
        const double d0 = secant(p, n - 2);
        const double d1 = secant(p, n - 3);
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
            return 3.0 * d0;
        return m;
    }
    const double d0 = secant(p, i - 1);
    const double d1 = secant(p, i);
    if (d0 * d1 <= 0.0) return 0.0;
    const double h0 = p.table_s[i] - p.table_s[i - 1];
    const double h1 = p.table_s[i + 1] - p.table_s[i];
    const double w0 = 2.0 * h1 + h0;
    const double w1 = h1 + 2.0 * h0;
    return (w0 + w1) / (w0 / d0 + w1 / d1);
}

TableInterval table_interval(const PotentialSpec& p, double s) {
    const auto& xs = p.table_s;
    const auto it = std::upper_bound(xs.begin(), xs.end(), s);
    std::size_t i = (it == xs.begin()) ? 0 : (it - xs.begin() - 1);
    i = std::min(i, xs.size() - 2);
    return {xs[i], xs[i + 1], p.table_gprime[i], p.table_gprime[i + 1],
            table_tangent(p, i), table_tangent(p, i + 1)};
}

double table_gprime_at(const PotentialSpec& p, double s) {
    if (s >= p.table_s.back()) return p.table_gprime.back();
    const TableInterval iv = table_interval(p, s);
    const double h = iv.s1 - iv.s0;
    const double u = (s - iv.s0) / h;
    const double u2 = u * u, u3 = u2 * u;
    return iv.y0 * (2.0 * u3 - 3.0 * u2 + 1.0) +
           h * iv.m0 * (u3 - 2.0 * u2 + u) +
           iv.y1 * (-2.0 * u3 + 3.0 * u2) + h * iv.m1 * (u3 - u2);
}

// Integral of the Hermite piece from its left node to s0 + u*h.
double hermite_integral(const TableInterval& iv, double u) {
    const double h = iv.s1 - iv.s0;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    return h * (iv.y0 * (0.5 * u4 - u3 + u) +
                h * iv.m0 * (0.25 * u4 - 2.0 * u3 / 3.0 + 0.5 * u2) +
                iv.y1 * (-0.5 * u4 + u3) +
                h * iv.m1 * (0.25 * u4 - u3 / 3.0));
}

double table_g_at(const PotentialSpec& p, double s) {
    double acc = 0.0;
    const auto& xs = p.table_s;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const TableInterval iv{xs[i], xs[i + 1], p.table_gprime[i],
                               p.table_gprime[i + 1], table_tangent(p, i),
                               table_tangent(p, i + 1)};
        if (s >= xs[i + 1]) {
            acc += hermite_integral(iv, 1.0);
        } else {
            acc += hermite_integral(iv, (s - xs[i]) / (xs[i + 1] - xs[i]));
            return acc;
        }
    }
    // constant extrapolation of g' beyond the table
    return acc + p.table_gprime.back() * (s - xs.back());
}

}  // namespace

std::string to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::power_law: return "power_law";
        case PotentialKind::quadratic_plus_quartic:
            return "quadratic_plus_quartic";
        case PotentialKind::truncated_power_law: return "truncated_power_law";
        case PotentialKind::custom_table: return "custom_table";
    }
    return "?";
}

void validate(const PotentialSpec& p) {
    switch (p.kind) {
        case PotentialKind::power_law:
            if (!(p.beta >= 2.0))
                throw UsageError("power_law exponent must be >= 2");
            return;
        case PotentialKind::quadratic_plus_quartic:
            if (!(p.weights[0] >= 0.0) || !(p.weights[1] >= 0.0))
                throw UsageError(
                    "quadratic_plus_quartic weights must be >= 0");
            return;
        case PotentialKind::truncated_power_law:
            if (!(p.beta >= 2.0))
                throw UsageError("truncated_power_law exponent must be >= 2");
            if (!(p.zeta > 0.0))
                throw UsageError("truncated_power_law needs zeta > 0");
            return;
        case PotentialKind::custom_table: {
            const std::size_t n = p.table_s.size();
            if (n < 2 || p.table_gprime.size() != n)
                throw UsageError("custom_table needs >= 2 samples with "
                                 "matching s and g' arrays");
            if (p.table_s.front() != 0.0)
                throw UsageError("custom_table samples must start at s = 0");
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(p.table_s[i]) ||
                    !std::isfinite(p.table_gprime[i]))
                    throw UsageError("custom_table samples must be finite");
                if (i + 1 < n && !(p.table_s[i] < p.table_s[i + 1]))
                    throw UsageError(
                        "custom_table s samples must be strictly increasing");
            }
            return;
        }
    }
    throw UsageError("unknown potential kind");
}

double g_value(const PotentialSpec& p, double s) {
    require_nonneg_s(s, "g_value");
    switch (p.kind) {
        case PotentialKind::power_law:
            return pow_fast(s, 0.5 * p.beta) / p.beta;
        case PotentialKind::quadratic_plus_quartic:
            return 0.5 * p.weights[0] * s + 0.25 * p.weights[1] * s * s;
        case PotentialKind::truncated_power_law: {
            const double th = std::sqrt(s);
            const double x = th - p.zeta;
            if (x <= 0.0) return 0.0;
            if (p.beta >= 3.0) {
                // d/dth g(th^2) = th (th - zeta)^(beta-2), integrated
                return std::pow(x, p.beta) / p.beta +
                       p.zeta * std::pow(x, p.beta - 1.0) / (p.beta - 1.0);
            }
            // smoothed-hinge profile, integrated in closed form
            const double e = kHingeEps;
            const double z = p.zeta;
            return x * x * x / 3.0 + 0.5 * (z - e) * x * x - z * e * x +
                   e * e * (x + (z - e) * std::log((x + e) / e));
        }
        case PotentialKind::custom_table:
            return table_g_at(p, s);
    }
    throw UsageError("unknown potential kind");
}

double g_prime(const PotentialSpec& p, double s) {
    require_nonneg_s(s, "g_prime");
    switch (p.kind) {
        case PotentialKind::power_law:
            return 0.5 * pow_fast(s, 0.5 * p.beta - 1.0);
        case PotentialKind::quadratic_plus_quartic:
            return 0.5 * p.weights[0] + 0.5 * p.weights[1] * s;
        case PotentialKind::truncated_power_law: {
            const double x = std::sqrt(s) - p.zeta;
            if (x <= 0.0) return 0.0;
            if (p.beta >= 3.0) return 0.5 * std::pow(x, p.beta - 2.0);
            return 0.5 * smooth_hinge(x);
        }
        case PotentialKind::custom_table:
            return table_gprime_at(p, s);
    }
    throw UsageError("unknown potential kind");
}

Radii radii(const ManifoldDescriptor& m) {
    const double mu = m.curvature_upper;
    const double half_inj = 0.5 * m.injectivity_radius;
    if (mu <= 0.0) return {half_inj, half_inj};
    const double pi = 3.14159265358979323846;
    const double rmu = std::sqrt(mu);
    return {std::min(half_inj, 0.5 * pi / rmu),
            std::min(half_inj, 0.25 * pi / rmu)};
}

double c_mu(const ManifoldDescriptor& m, double r) {
    const Radii rr = radii(m);
    if (!(r >= 0.0) || !(r < rr.r_c))
        throw UsageError("c_mu needs 0 <= r < r_c = " +
                         std::to_string(rr.r_c));
    if (m.curvature_upper <= 0.0) return 1.0;
    return std::sin(2.0 * std::sqrt(m.curvature_upper) * (rr.r_c - r));
}

AttractivenessClass classify(const PotentialSpec& p,
                             const ManifoldDescriptor& m, double r_check) {
    validate(p);
    if (!(r_check > 0.0)) throw UsageError("classify needs r_check > 0");
    const Radii rr = radii(m);
    const double span = std::min(2.0 * rr.r_c, r_check);

    // Scan g'(r^2) on a dense grid of (0, span].
    std::size_t zero_prefix = 0;
    bool in_prefix = true;
    bool interior_zero = false;
    for (int i = 1; i <= kScanSamples; ++i) {
        const double r = span * static_cast<double>(i) /
                         static_cast<double>(kScanSamples);
        const double gp = g_prime(p, r * r);
        if (gp < 0.0)
            throw UsageError("potential is not attractive: g' < 0 at "
                             "distance " + std::to_string(r));
        if (gp == 0.0) {
            if (in_prefix)
                ++zero_prefix;
            else
                interior_zero = true;
        } else {
            in_prefix = false;
        }
    }

    if (interior_zero || in_prefix)  // zeros past the dead zone, or all-zero
        return {AttractionClass::attractive_only, std::nullopt};
    if (zero_prefix == 0) return {AttractionClass::strong, std::nullopt};

    const double zeta = (p.kind == PotentialKind::truncated_power_law)
                            ? p.zeta
                            : span * static_cast<double>(zero_prefix) /
                                  static_cast<double>(kScanSamples);
    if (!(zeta < 0.5 * rr.r_w))
        return {AttractionClass::attractive_only, std::nullopt};
    return {AttractionClass::weak, zeta};
}

bool admissible_kc(const PotentialSpec& p, const ManifoldDescriptor& m,
                   double r, double r_check) {
    validate(p);
    const Radii rr = radii(m);
    if (!(r > 0.0) || !(r < rr.r_c))
        throw UsageError("admissible_kc needs 0 < r < r_c = " +
                         std::to_string(rr.r_c));
    const double mu = m.curvature_upper;
    const double span = std::min(2.0 * rr.r_c, r_check);
    double prev = -kInf;
    for (int i = 1; i <= kScanSamples; ++i) {
        const double th = span * static_cast<double>(i) /
                          static_cast<double>(kScanSamples);
        double phi = g_prime(p, th * th);
        if (mu > 0.0) {
            const double a = std::sqrt(mu) * th;
            phi *= th / std::sin(a);
        }
        if (phi < prev - 1e-12) return false;
        prev = phi;
    }
    return true;
}

PairWeightEval::PairWeightEval(const PotentialSpec& p) : spec_(&p) {
    validate(p);
    if (p.kind == PotentialKind::power_law) {
        const double e = p.beta - 2.0;
        const double r = std::round(e);
        if (std::abs(e - r) < 1e-12 && r >= 0.0 && r <= 32.0)
            int_exp_ = static_cast<int>(r);
    }
}

}  // namespace geoflow
