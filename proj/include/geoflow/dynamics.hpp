#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geoflow/ensemble.hpp"
#include "geoflow/potential.hpp"

namespace geoflow {

struct SimulationConfig {
    double dt = 1e-2;
    double t_end = 0.0;
    int snapshot_stride = 10;
    ManifoldPoint center;     // required: ball center the support lives in
    double ball_radius_r = 0; // support radius; must stay below r_w
    std::uint64_t seed = 0;   // provenance only (sampling happens upstream)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ParticleEnsemble> states;
    SimulationConfig config;
};

// v_i = sum_{j != i} m_j * 2 g'(d(x_i,x_j)^2) * log_{x_i} x_j.
// Each unordered pair is evaluated once (the distance and both directional
// logs come out of one fused kernel); the per-particle sum then runs over
// ascending j, so results do not depend on the worker count.
std::vector<TangentVector> velocity_field(const ParticleEnsemble& e,
                                          const PotentialSpec& p,
                                          int workers = 1);

// Aggregates of the k1 stage -- the exact velocity field at the pre-step
// state -- for callers that stream diagnostics and do not want to pay for
// a second field evaluation per step.
struct StepStats {
    double dissipation = 0.0;  // sum_i m_i |v_i|^2 at the pre-step state
};

// One explicit RK4 step of length dt along geodesics: stage points are
// exp_x(c k), stage velocities are pulled back to the base tangent space by
// the finite difference (log_x(exp_y(h v)) - log_x(y)) / h with h = 1e-6
// (identity on flat backends, where it is exact), and the update is
// x <- exp_x(dt/6 (k1 + 2 k2 + 2 k3 + k4)).
ParticleEnsemble rk4_step(const ParticleEnsemble& e, const PotentialSpec& p,
                          double dt, int workers = 1,
                          StepStats* stats = nullptr);

// Fixed-step integration from t = 0 to t_end (which must sit on the dt
// grid).  Snapshots are taken at t = 0, every snapshot_stride steps, and at
// the final step.  After every step the support is required to stay inside
// the closed ball of radius ball_radius_r + 1e-6 around the center;
// escaping it is a numerical error reporting the failing time.
Trajectory simulate(const ParticleEnsemble& initial, const PotentialSpec& p,
                    const SimulationConfig& cfg, int workers = 1);

// Streaming variant for long runs: instead of storing states, calls
// observe(step, t, coords, dissipation) once per step index 0..n_steps
// (0 is the initial state) with the row-major flat coordinates (aliasing
// an internal buffer, valid only during the call) and
// sum_i m_i |v_i(t)|^2 evaluated at that state.  Validation, the per-step
// ball containment check, and error reporting match simulate; the
// snapshot_stride field is ignored.
void simulate_stream(
    const ParticleEnsemble& initial, const PotentialSpec& p,
    const SimulationConfig& cfg, int workers,
    const std::function<void(long long, double, CSpan, double)>& observe);

// Closed-form pair distance for two bodies of mass 1/2 each, obeying
// d' = -2 g'(d^2) d:
//   beta == 2:  d(t) = d0 exp(-t)
//   beta  > 2:  d(t) = (d0^(2-beta) + (beta-2) t)^(-1/(beta-2))
// power_law potentials only.
std::function<double(double)> two_body_reference(double d0,
                                                 const PotentialSpec& p);

}  // namespace geoflow
