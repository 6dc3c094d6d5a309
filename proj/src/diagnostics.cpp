#include "geoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr int kSimpsonPanels = 10000;
constexpr double kDiameterClamp = 1e-12;

// Composite Simpson for f on [a, b] (a <= b).
template <class F>
double simpson(F&& f, double a, double b, int panels) {
    const double h = (b - a) / (2.0 * panels);
    double odd = 0.0, even = 0.0;
    for (int k = 1; k < 2 * panels; ++k) {
        const double x = a + h * static_cast<double>(k);
        if (k & 1)
            odd += f(x);
        else
            even += f(x);
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

double rate_integrand(const PotentialSpec& p, double xi) {
    return 1.0 / (xi * g_prime(p, 0.25 * xi * xi));
}

}  // namespace

bool rate_bound_applies(const PotentialSpec& p, const ManifoldDescriptor& desc,
                        double ball_radius_r, std::string* reason) {
    const Radii rr = radii(desc);
    const auto cls = classify(p, desc);
    std::string why;
    if (cls.cls != AttractionClass::strong)
        why = "the potential is not strongly attractive";
    else if (!(ball_radius_r < rr.r_c))
        why = "ball radius " + std::to_string(ball_radius_r) +
              " is not below r_c = " + std::to_string(rr.r_c);
    else if (!admissible_kc(p, desc, ball_radius_r))
        why = "the potential fails the contraction monotonicity condition";
    if (reason) *reason = why;
    return why.empty();
}

DiameterWitness diameter_witness(const ParticleEnsemble& e) {
    const Manifold& m = *e.manifold;
    DiameterWitness best;
    for (int i = 0; i < e.size(); ++i)
        for (int j = i + 1; j < e.size(); ++j) {
            const double d = m.distance_raw(
                e.points[static_cast<std::size_t>(i)].coords,
                e.points[static_cast<std::size_t>(j)].coords);
            if (d > best.value) best = {i, j, d};
        }
    return best;
}

double diameter(const ParticleEnsemble& e) {
    return diameter_witness(e).value;
}

double interaction_energy(const ParticleEnsemble& e, const PotentialSpec& p) {
    validate(p);
    const Manifold& m = *e.manifold;
    const double g0 = g_value(p, 0.0);
    double acc = 0.0;
    double diag = 0.0;
    for (int i = 0; i < e.size(); ++i) {
        const double mi = e.masses[static_cast<std::size_t>(i)];
        diag += mi * mi;
        for (int j = i + 1; j < e.size(); ++j) {
            const double d = m.distance_raw(
                e.points[static_cast<std::size_t>(i)].coords,
                e.points[static_cast<std::size_t>(j)].coords);
            acc += mi * e.masses[static_cast<std::size_t>(j)] *
                   g_value(p, d * d);
        }
    }
    return acc + 0.5 * diag * g0;
}

double dissipation_residual(const ParticleEnsemble& e, const PotentialSpec& p,
                            double dE_dt_estimate) {
    const Manifold& m = *e.manifold;
    const auto vel = velocity_field(e, p);
    double drain = 0.0;
    for (int i = 0; i < e.size(); ++i)
        drain += e.masses[static_cast<std::size_t>(i)] *
                 m.inner_raw(vel[static_cast<std::size_t>(i)].vec,
                             vel[static_cast<std::size_t>(i)].vec);
    return std::abs(dE_dt_estimate + drain);
}

namespace {

// True when the five snapshot times starting at `base` are spaced by the
// same step to within a slack far below any sensible dt, so the uniform
// grid stencil keeps its full order.
bool uniform_window(const std::vector<double>& t, std::size_t base) {
    const double h = t[base + 1] - t[base];
    if (h <= 0.0) return false;
    for (std::size_t i = 1; i < 4; ++i)
        if (std::abs(t[base + i + 1] - t[base + i] - h) > 1e-9 * h)
            return false;
    return true;
}

}  // namespace

double energy_rate_estimate(const std::vector<double>& t,
                            const std::vector<double>& E, std::size_t k) {
    const std::size_t n = t.size();
    if (n >= 5) {
        // five-point stencils, error O(h^4): centered where the window
        // fits, one sided at the first and last interior snapshots
        if (k >= 2 && k + 2 < n && uniform_window(t, k - 2)) {
            const double h = t[k + 1] - t[k];
            return (E[k - 2] - 8.0 * E[k - 1] + 8.0 * E[k + 1] - E[k + 2]) /
                   (12.0 * h);
        }
        if (k == 1 && uniform_window(t, 0)) {
            const double h = t[1] - t[0];
            return (-3.0 * E[0] - 10.0 * E[1] + 18.0 * E[2] - 6.0 * E[3] +
                    E[4]) /
                   (12.0 * h);
        }
        if (k + 2 == n && uniform_window(t, n - 5)) {
            const double h = t[k] - t[k - 1];
            return (3.0 * E[n - 1] + 10.0 * E[n - 2] - 18.0 * E[n - 3] +
                    6.0 * E[n - 4] - E[n - 5]) /
                   (12.0 * h);
        }
    }
    // centered difference, error O(h^2): short or nonuniform series
    return (E[k + 1] - E[k - 1]) / (t[k + 1] - t[k - 1]);
}

double w2_to_delta(const ParticleEnsemble& e, const ManifoldPoint& q) {
    const Manifold& m = *e.manifold;
    m.distance(q, q);  // kind check
    double acc = 0.0;
    for (int i = 0; i < e.size(); ++i) {
        const double d = m.distance_raw(
            e.points[static_cast<std::size_t>(i)].coords, q.coords);
        acc += e.masses[static_cast<std::size_t>(i)] * d * d;
    }
    return std::sqrt(acc);
}

double consensus_integral(const ParticleEnsemble& e) {
    const Manifold& m = *e.manifold;
    double acc = 0.0;
    for (int i = 0; i < e.size(); ++i)
        for (int j = i + 1; j < e.size(); ++j)
            acc += e.masses[static_cast<std::size_t>(i)] *
                   e.masses[static_cast<std::size_t>(j)] *
                   m.distance_raw(e.points[static_cast<std::size_t>(i)].coords,
                                  e.points[static_cast<std::size_t>(j)].coords);
    return 2.0 * acc;
}

std::vector<RateBoundPoint> rate_bound_series(
    const std::vector<double>& times, const std::vector<double>& diameters,
    const ManifoldDescriptor& desc, double ball_radius_r,
    const PotentialSpec& p) {
    if (times.empty() || times.size() != diameters.size())
        throw UsageError("rate bound needs matching times and diameters");
    std::string why;
    if (!rate_bound_applies(p, desc, ball_radius_r, &why))
        throw UsageError("rate bound unavailable: " + why);
    const double cmu = c_mu(desc, ball_radius_r);
    const double d0 = diameters.front();
    std::vector<RateBoundPoint> out;
    out.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        RateBoundPoint pt;
        pt.t = times[k];
        pt.rhs = -cmu * pt.t;
        double dk = diameters[k];
        if (dk < kDiameterClamp) {
            dk = kDiameterClamp;
            pt.clamped = true;
        }
        const auto f = [&](double xi) { return rate_integrand(p, xi); };
        // oriented integral from d0 to dk; the diameter should only shrink
        pt.lhs = (dk <= d0) ? -simpson(f, dk, d0, kSimpsonPanels)
                            : simpson(f, d0, dk, kSimpsonPanels);
        out.push_back(pt);
    }
    return out;
}

std::vector<RateBoundPoint> rate_bound_check(const Trajectory& traj,
                                             const PotentialSpec& p) {
    if (traj.states.empty()) throw UsageError("empty trajectory");
    std::vector<double> diameters;
    diameters.reserve(traj.states.size());
    for (const auto& e : traj.states) diameters.push_back(diameter(e));
    return rate_bound_series(traj.times, diameters,
                             traj.states.front().manifold->descriptor(),
                             traj.config.ball_radius_r, p);
}

double weak_functional(const ParticleEnsemble& e, const PotentialSpec& p) {
    const auto cls = classify(p, e.manifold->descriptor());
    if (cls.cls != AttractionClass::weak || !cls.zeta)
        throw UsageError("weak_functional needs a weak potential with a "
                         "dead zone");
    const double zeta = *cls.zeta;
    const Manifold& m = *e.manifold;
    const double g0 = g_value(p, 0.0);
    double acc = 0.0;
    for (int i = 0; i < e.size(); ++i)
        for (int j = i + 1; j < e.size(); ++j) {
            const double d = m.distance_raw(
                e.points[static_cast<std::size_t>(i)].coords,
                e.points[static_cast<std::size_t>(j)].coords);
            if (d > zeta)
                acc += 2.0 * e.masses[static_cast<std::size_t>(i)] *
                       e.masses[static_cast<std::size_t>(j)] *
                       (g_value(p, d * d) - g0);
        }
    return acc;
}

std::vector<TimeSeriesRecord> trajectory_diagnostics(const Trajectory& traj,
                                                     const PotentialSpec& p) {
    if (traj.states.empty()) throw UsageError("empty trajectory");
    const auto& md = traj.states.front().manifold->descriptor();
    const auto cls = classify(p, md);
    const bool rate_on =
        rate_bound_applies(p, md, traj.config.ball_radius_r);

    const std::size_t nk = traj.times.size();
    std::vector<TimeSeriesRecord> rows(nk);
    std::vector<double> energies(nk), diameters(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        const ParticleEnsemble& e = traj.states[k];
        TimeSeriesRecord& row = rows[k];
        row.t = traj.times[k];
        row.diameter = diameter(e);
        diameters[k] = row.diameter;
        row.energy = interaction_energy(e, p);
        energies[k] = row.energy;
        row.w2_to_mean = w2_to_delta(e, frechet_mean(e));
        row.consensus_integral = consensus_integral(e);
        if (cls.cls == AttractionClass::weak)
            row.weak_functional = weak_functional(e, p);
    }
    for (std::size_t k = 1; k + 1 < nk; ++k) {
        if (traj.times[k + 1] - traj.times[k - 1] > 0.0)
            rows[k].dissipation_residual = dissipation_residual(
                traj.states[k], p,
                energy_rate_estimate(traj.times, energies, k));
    }
    if (rate_on) {
        const auto pts = rate_bound_series(traj.times, diameters, md,
                                           traj.config.ball_radius_r, p);
        for (std::size_t k = 0; k < nk; ++k) {
            rows[k].rate_lhs = pts[k].lhs;
            rows[k].rate_rhs = pts[k].rhs;
        }
    }
    return rows;
}

}  // namespace geoflow
