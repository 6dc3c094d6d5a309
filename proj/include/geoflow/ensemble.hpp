#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "geoflow/manifold.hpp"

namespace geoflow {

// Weighted particle configuration.  Masses are strictly positive and sum
// to 1 (within 1e-12); all pairwise distances stay below the injectivity
// radius so every log map between members is defined.
struct ParticleEnsemble {
    std::shared_ptr<const Manifold> manifold;
    std::vector<ManifoldPoint> points;
    std::vector<double> masses;

    int size() const { return static_cast<int>(points.size()); }
};

// Validates the invariants above (throws UsageError).
ParticleEnsemble make_ensemble(std::shared_ptr<const Manifold> manifold,
                               std::vector<ManifoldPoint> points,
                               std::vector<double> masses);

// Re-checks the pairwise-distance invariant on an existing ensemble.
void check_ensemble(const ParticleEnsemble& e);

std::vector<double> uniform_masses(int n);

// Weighted Fréchet mean by fixed-point iteration
//   q <- exp_q( sum_i m_i log_q x_i )
// run until the gradient norm drops below 1e-12 (at most 200 iterations),
// starting from the member that minimizes the weighted sum of squared
// distances.  Well-defined for supports inside a ball of radius r_w.
ManifoldPoint frechet_mean(const ParticleEnsemble& e);

enum class SamplingKind {
    // Rotation angle ~ U(0, radius) about an axis with polar angle
    // ~ U(0, pi) and azimuth ~ U(0, 2 pi), applied to the center.
    // so3 only.
    so3_angle_axis,
    // Tangent direction at the center (uniform on the unit sphere of the
    // tangent space) scaled by a U(0, radius) length, pushed through exp.
    tangent_uniform,
};

struct SamplingScheme {
    SamplingKind kind = SamplingKind::tangent_uniform;
    double radius = 1.0;
};

// n samples in the closed ball around `center`; identical (seed, scheme,
// center) inputs reproduce identical points bit for bit.
std::vector<ManifoldPoint> sample_ball(const Manifold& m,
                                       const ManifoldPoint& center,
                                       const SamplingScheme& scheme,
                                       std::uint64_t seed, int n);

}  // namespace geoflow
