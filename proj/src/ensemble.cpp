#include "geoflow/ensemble.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "geoflow/error.hpp"
#include "geoflow/rng.hpp"

namespace geoflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMassSumTol = 1e-12;
constexpr double kMeanGradTol = 1e-12;
constexpr int kMeanMaxIter = 200;

// Orthonormal basis of the tangent space at `base`, one ambient vector per
// intrinsic dimension, orthonormal under the backend's inner product.
std::vector<std::vector<double>> tangent_basis(const Manifold& m,
                                               const ManifoldPoint& base) {
    const int ambient = m.ambient_dim();
    const int dim = m.descriptor().dim;
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<std::size_t>(dim));
    for (int k = 0; k < ambient && static_cast<int>(basis.size()) < dim; ++k) {
        std::vector<double> v(static_cast<std::size_t>(ambient), 0.0);
        v[static_cast<std::size_t>(k)] = 1.0;
        // project out the base-point normal via the tangency defect
        // direction, then Gram-Schmidt against what we have
        switch (m.kind()) {
            case ManifoldKind::euclidean:
                break;
            case ManifoldKind::sphere:
            case ManifoldKind::so3: {
                const double c = dot(v, base.coords);
                axpy(-c, base.coords, v);
                break;
            }
            case ManifoldKind::hyperbolic: {
                // Minkowski projection: v -> v + <v, p>_M p (since
                // <p, p>_M = -1)
                const double c = v[0] * base.coords[0] +
                                 v[1] * base.coords[1] -
                                 v[2] * base.coords[2];
                axpy(c, base.coords, v);
                break;
            }
        }
        for (const auto& b : basis) axpy(-m.inner_raw(b, v), b, v);
        const double n = std::sqrt(std::max(m.inner_raw(v, v), 0.0));
        if (n < 1e-9) continue;  // ambient axis parallel to the normal
        for (double& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    if (static_cast<int>(basis.size()) != dim)
        throw NumericalError("failed to build a tangent basis");
    return basis;
}

// Unit direction in an intrinsic-dimension-`dim` tangent space, written in
// the coefficients of an orthonormal basis.  Fixed draw count per call.
std::vector<double> unit_direction(Rng& rng, int dim) {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    if (dim == 1) {
        c[0] = (rng.unit() < 0.5) ? -1.0 : 1.0;
        return c;
    }
    if (dim == 2) {
        const double phi = rng.uniform(2.0 * kPi);
        c[0] = std::cos(phi);
        c[1] = std::sin(phi);
        return c;
    }
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) {
        c[static_cast<std::size_t>(k)] = rng.gaussian();
        n2 += c[static_cast<std::size_t>(k)] * c[static_cast<std::size_t>(k)];
    }
    if (n2 == 0.0) {  // measure zero; give a deterministic fallback
        c[0] = 1.0;
        n2 = 1.0;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : c) x *= inv;
    return c;
}

}  // namespace

ParticleEnsemble make_ensemble(std::shared_ptr<const Manifold> manifold,
                               std::vector<ManifoldPoint> points,
                               std::vector<double> masses) {
    if (!manifold) throw UsageError("ensemble needs a manifold");
    if (points.empty()) throw UsageError("ensemble needs at least one point");
    if (points.size() != masses.size())
        throw UsageError("ensemble has " + std::to_string(points.size()) +
                         " points but " + std::to_string(masses.size()) +
                         " masses");
    double sum = 0.0;
    for (double mi : masses) {
        if (!(mi > 0.0))
            throw UsageError("ensemble masses must be strictly positive");
        sum += mi;
    }
    if (std::abs(sum - 1.0) > kMassSumTol)
        throw UsageError("ensemble masses must sum to 1 (got " +
                         std::to_string(sum) + ")");
    ParticleEnsemble e{std::move(manifold), std::move(points),
                       std::move(masses)};
    for (const auto& p : e.points) e.manifold->distance(p, p);  // kind check
    check_ensemble(e);
    return e;
}

void check_ensemble(const ParticleEnsemble& e) {
    const double inj = e.manifold->descriptor().injectivity_radius;
    if (std::isinf(inj)) return;
    for (std::size_t i = 0; i < e.points.size(); ++i)
        for (std::size_t j = i + 1; j < e.points.size(); ++j) {
            const double d = e.manifold->distance_raw(e.points[i].coords,
                                                      e.points[j].coords);
            if (!(d < inj))
                throw UsageError(
                    "ensemble points " + std::to_string(i) + " and " +
                    std::to_string(j) + " are " + std::to_string(d) +
                    " apart, at or beyond the injectivity radius " +
                    std::to_string(inj));
        }
}

std::vector<double> uniform_masses(int n) {
    if (n < 1) throw UsageError("need at least one particle");
    return std::vector<double>(static_cast<std::size_t>(n),
                               1.0 / static_cast<double>(n));
}

ManifoldPoint frechet_mean(const ParticleEnsemble& e) {
    const Manifold& m = *e.manifold;
    const int n = e.size();

    // start from the member with the least weighted squared-distance sum
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double cost = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = m.distance_raw(e.points[i].coords,
                                            e.points[j].coords);
            cost += e.masses[static_cast<std::size_t>(j)] * d * d;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }

    ManifoldPoint q = e.points[static_cast<std::size_t>(best)];
    const std::size_t ambient = q.coords.size();
    std::vector<double> grad(ambient), lg(ambient), next(ambient);
    for (int it = 0; it < kMeanMaxIter; ++it) {
        fill_zero(grad);
        for (int j = 0; j < n; ++j) {
            m.log_raw(q.coords, e.points[static_cast<std::size_t>(j)].coords,
                      lg);
            axpy(e.masses[static_cast<std::size_t>(j)], lg, grad);
        }
        const double gn = std::sqrt(std::max(m.inner_raw(grad, grad), 0.0));
        if (gn <= kMeanGradTol) return q;
        m.exp_raw(q.coords, grad, next);
        q.coords.assign(next.begin(), next.end());
    }
    throw NumericalError("mean iteration did not reach gradient norm 1e-12 "
                         "within 200 steps");
}

std::vector<ManifoldPoint> sample_ball(const Manifold& m,
                                       const ManifoldPoint& center,
                                       const SamplingScheme& scheme,
                                       std::uint64_t seed, int n) {
    if (n < 0) throw UsageError("sample count must be >= 0");
    if (!(scheme.radius > 0.0))
        throw UsageError("sampling radius must be > 0");
    m.distance(center, center);  // kind/size check
    std::vector<ManifoldPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 0) return out;
    Rng rng(seed);

    if (scheme.kind == SamplingKind::so3_angle_axis) {
        if (m.kind() != ManifoldKind::so3)
            throw UsageError("so3_angle_axis sampling requires the so3 "
                             "manifold");
        const Quat qc = Quat::from(center.coords);
        for (int i = 0; i < n; ++i) {
            const double th = rng.uniform(scheme.radius);
            const double polar = rng.uniform(kPi);
            const double azim = rng.uniform(2.0 * kPi);
            const double sp = std::sin(polar);
            const double axis[3] = {sp * std::cos(azim), sp * std::sin(azim),
                                    std::cos(polar)};
            const double h = 0.5 * th;
            const double s = std::sin(h);
            const Quat rel{std::cos(h), s * axis[0], s * axis[1],
                           s * axis[2]};
            std::vector<double> c(4);
            qc.mul(rel).to(c);
            m.project_raw(c);
            out.push_back({m.kind(), std::move(c)});
        }
        return out;
    }

    const auto basis = tangent_basis(m, center);
    const int dim = m.descriptor().dim;
    std::vector<double> v(center.coords.size());
    for (int i = 0; i < n; ++i) {
        const auto dir = unit_direction(rng, dim);
        const double rho = rng.uniform(scheme.radius);
        fill_zero(v);
        for (int k = 0; k < dim; ++k)
            axpy(rho * dir[static_cast<std::size_t>(k)],
                 basis[static_cast<std::size_t>(k)], v);
        std::vector<double> c(center.coords.size());
        m.exp_raw(center.coords, v, c);
        out.push_back({m.kind(), std::move(c)});
    }
    return out;
}

}  // namespace geoflow
