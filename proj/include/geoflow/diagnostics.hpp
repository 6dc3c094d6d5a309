#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/dynamics.hpp"

namespace geoflow {

// Largest pairwise distance; ties keep the lexicographically first pair.
struct DiameterWitness {
    int i = 0, j = 0;
    double value = 0.0;
};
DiameterWitness diameter_witness(const ParticleEnsemble& e);
double diameter(const ParticleEnsemble& e);

// E = 1/2 sum_i sum_j m_i m_j g(d(x_i, x_j)^2), the i == j diagonal
// included (so a single point carries g(0)/2).
double interaction_energy(const ParticleEnsemble& e, const PotentialSpec& p);

// |dE/dt_estimate + sum_i m_i |v_i|^2|: energy is supposed to drain at
// exactly the squared-velocity rate, so this residual measures how far a
// numerically estimated dE/dt is from that balance.
double dissipation_residual(const ParticleEnsemble& e, const PotentialSpec& p,
                            double dE_dt_estimate);

// dE/dt at interior snapshot k estimated from the recorded energy series:
// fourth-order five-point stencils (centered where the window fits, one
// sided at the first and last interior snapshots) when the surrounding
// snapshots are uniformly spaced, otherwise the second-order centered
// difference.  Requires 0 < k < times.size() - 1 and strictly increasing
// times at k-1, k+1.
double energy_rate_estimate(const std::vector<double>& times,
                            const std::vector<double>& energies,
                            std::size_t k);

// sqrt(sum_i m_i d(x_i, q)^2): transport distance from the ensemble to the
// point mass at q.
double w2_to_delta(const ParticleEnsemble& e, const ManifoldPoint& q);

// sum_i sum_j m_i m_j d(x_i, x_j); bounded by 2 w2_to_delta(e, mean).
double consensus_integral(const ParticleEnsemble& e);

// Per-snapshot check of the integral contraction bound
//   int_{D(0)}^{D(t)} dxi / (xi g'(xi^2 / 4))  <=  -C_mu t
// where D is the diameter and C_mu = c_mu(manifold, ball_radius_r).
// The left side is evaluated by composite Simpson on 1e4 panels; when the
// diameter falls below 1e-12 the lower limit is clamped there and the
// record is flagged.  Requires a strong potential that passes the
// monotonicity condition, and ball_radius_r < r_c.
struct RateBoundPoint {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool clamped = false;
};
std::vector<RateBoundPoint> rate_bound_check(const Trajectory& traj,
                                             const PotentialSpec& p);

// Same columns computed from a recorded diameter series (times[0] must be
// the initial snapshot the integral is anchored at).
std::vector<RateBoundPoint> rate_bound_series(
    const std::vector<double>& times, const std::vector<double>& diameters,
    const ManifoldDescriptor& desc, double ball_radius_r,
    const PotentialSpec& p);

// True when the rate-bound columns apply: strong classification, the
// rate monotonicity condition, and ball_radius_r < r_c.  On false,
// `reason` (when non-null) names the failed requirement.
bool rate_bound_applies(const PotentialSpec& p, const ManifoldDescriptor& desc,
                        double ball_radius_r, std::string* reason = nullptr);

// sum over pairs with d > zeta of m_i m_j (g(d^2) - g(0)): the interaction
// mass still outside the dead zone of a weak potential.  Usage error for
// potentials that do not classify as weak.
double weak_functional(const ParticleEnsemble& e, const PotentialSpec& p);

// One row of the diagnostics series; fields that do not apply to the run
// stay unset and serialize as empty CSV cells.
struct TimeSeriesRecord {
    double t = 0.0;
    double diameter = 0.0;
    double energy = 0.0;
    std::optional<double> dissipation_residual;
    std::optional<double> w2_to_mean;
    std::optional<double> consensus_integral;
    std::optional<double> rate_lhs;
    std::optional<double> rate_rhs;
    std::optional<double> weak_functional;
};

// Assembles the per-snapshot series for a trajectory: diameter and energy
// always; the dissipation residual at interior snapshots against the
// energy_rate_estimate of dE/dt; rate columns when the potential is
// strong, passes the monotonicity condition and ball_radius_r < r_c; the
// weak tail functional when it classifies as weak.
std::vector<TimeSeriesRecord> trajectory_diagnostics(const Trajectory& traj,
                                                     const PotentialSpec& p);

}  // namespace geoflow
