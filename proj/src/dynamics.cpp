#include "geoflow/dynamics.hpp"

#include <cmath>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr double kPullbackH = 1e-6;
constexpr double kBallEscapeTol = 1e-6;
constexpr double kSupportTol = 1e-9;

// ------------------------------------------------------------- task pool
// Persistent worker pool.  run() splits [0, n) into one contiguous chunk
// per worker; chunks only ever write disjoint output slots, so the result
// is bitwise independent of the worker count and of scheduling.

class TaskPool {
public:
    explicit TaskPool(int workers) : workers_(workers < 1 ? 1 : workers) {
        for (int t = 1; t < workers_; ++t)
            threads_.emplace_back([this, t] { worker_loop(t); });
    }

    TaskPool(const TaskPool&) = delete;
    TaskPool& operator=(const TaskPool&) = delete;

    ~TaskPool() {
        {
            std::unique_lock<std::mutex> lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& th : threads_) th.join();
    }

    int workers() const { return workers_; }

    void run(int n, const std::function<void(int, int)>& fn) {
        if (workers_ == 1 || n < 2) {
            fn(0, n);
            return;
        }
        {
            std::unique_lock<std::mutex> lk(mu_);
            fn_ = &fn;
            n_ = n;
            pending_ = workers_ - 1;
            ++generation_;
        }
        cv_.notify_all();
        run_chunk(0);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        fn_ = nullptr;
        if (error_) {
            auto err = error_;
            error_ = nullptr;
            std::rethrow_exception(err);
        }
    }

private:
    void run_chunk(int t) {
        const int begin = static_cast<int>(
            static_cast<long long>(n_) * t / workers_);
        const int end = static_cast<int>(
            static_cast<long long>(n_) * (t + 1) / workers_);
        if (begin < end) {
            try {
                (*fn_)(begin, end);
            } catch (...) {
                std::unique_lock<std::mutex> lk(mu_);
                if (!error_) error_ = std::current_exception();
            }
        }
    }

    void worker_loop(int t) {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            run_chunk(t);
            {
                std::unique_lock<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    const int workers_;
    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int, int)>* fn_ = nullptr;
    int n_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

// ------------------------------------------------------- flat state + work

struct PairIndex {
    int i, j;
};

struct VelocityWork {
    std::vector<PairIndex> pairs;       // (i, j), i < j, lexicographic
    std::vector<double> pair_weight;    // 2 g'(d^2) per pair
    std::vector<double> pair_logs;      // per pair: log_ij | log_ji
    std::vector<double> pair_dist;

    void resize(int n, int ambient) {
        const int np = n * (n - 1) / 2;
        if (static_cast<int>(pairs.size()) == np &&
            static_cast<int>(pair_logs.size()) == np * 2 * ambient)
            return;
        pairs.clear();
        pairs.reserve(static_cast<std::size_t>(np));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
        pair_weight.assign(static_cast<std::size_t>(np), 0.0);
        pair_dist.assign(static_cast<std::size_t>(np), 0.0);
        pair_logs.assign(static_cast<std::size_t>(np) * 2 * ambient, 0.0);
    }
};

// V[i] = sum_{j != i} m_j w(d_ij) log_ij, ascending j.
void velocity_field_raw(const Manifold& m, CSpan pts, CSpan masses, int n,
                        const PairWeightEval& weight, Span vel,
                        VelocityWork& work, TaskPool* pool) {
    const int A = m.ambient_dim();
    work.resize(n, A);
    const int np = static_cast<int>(work.pairs.size());

    auto fill = [&](int begin, int end) {
        for (int k = begin; k < end; ++k) {
            const auto [i, j] = work.pairs[static_cast<std::size_t>(k)];
            double d = 0.0;
            const std::size_t off = static_cast<std::size_t>(k) * 2 *
                                    static_cast<std::size_t>(A);
            m.log_pair_raw(pts.subspan(static_cast<std::size_t>(i) * A, A),
                           pts.subspan(static_cast<std::size_t>(j) * A, A),
                           Span(work.pair_logs).subspan(off, A),
                           Span(work.pair_logs).subspan(off + A, A), d);
            work.pair_dist[static_cast<std::size_t>(k)] = d;
            work.pair_weight[static_cast<std::size_t>(k)] = weight(d);
        }
    };
    if (pool)
        pool->run(np, fill);
    else
        fill(0, np);

    fill_zero(vel);
    // row offsets into the lexicographic pair list
    int k = 0;
    for (int i = 0; i < n; ++i) {
        // pairs (j, i) with j < i
        for (int j = 0; j < i; ++j) {
            const int kj = j * n - j * (j + 1) / 2 + (i - j - 1);
            const std::size_t off = static_cast<std::size_t>(kj) * 2 *
                                    static_cast<std::size_t>(A);
            axpy(masses[static_cast<std::size_t>(j)] *
                     work.pair_weight[static_cast<std::size_t>(kj)],
                 CSpan(work.pair_logs).subspan(off + A, A),
                 vel.subspan(static_cast<std::size_t>(i) * A, A));
        }
        // pairs (i, j) with j > i are contiguous starting at k
        for (int j = i + 1; j < n; ++j, ++k) {
            const std::size_t off = static_cast<std::size_t>(k) * 2 *
                                    static_cast<std::size_t>(A);
            axpy(masses[static_cast<std::size_t>(j)] *
                     work.pair_weight[static_cast<std::size_t>(k)],
                 CSpan(work.pair_logs).subspan(off, A),
                 vel.subspan(static_cast<std::size_t>(i) * A, A));
        }
    }
}

struct Rk4Work {
    VelocityWork vel;
    std::vector<double> k1, k2, k3, k4, staged, u, combo;
    std::vector<double> hv, probe, l0, l1;

    void resize(int n, int A) {
        const std::size_t m = static_cast<std::size_t>(n) *
                              static_cast<std::size_t>(A);
        k1.resize(m); k2.resize(m); k3.resize(m); k4.resize(m);
        staged.resize(m); u.resize(m); combo.resize(m);
        hv.resize(static_cast<std::size_t>(A));
        probe.resize(static_cast<std::size_t>(A));
        l0.resize(static_cast<std::size_t>(A));
        l1.resize(static_cast<std::size_t>(A));
    }
};

// staged = exp_X(c * k), then k_out = stage velocity pulled back to T_X.
void stage_velocity(const Manifold& m, CSpan X, CSpan masses, int n,
                    const PairWeightEval& weight, CSpan k_in, double c,
                    Span k_out, Rk4Work& w, TaskPool* pool) {
    const int A = m.ambient_dim();
    for (int i = 0; i < n; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * A;
        scale_to(k_in.subspan(off, A), c, Span(w.hv));
        m.exp_raw(X.subspan(off, A), w.hv, Span(w.staged).subspan(off, A));
    }
    velocity_field_raw(m, w.staged, masses, n, weight, Span(w.u), w.vel,
                       pool);
    if (m.flat()) {
        copy_to(w.u, k_out);
        return;
    }
    for (int i = 0; i < n; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * A;
        const CSpan x = X.subspan(off, A);
        const CSpan y = CSpan(w.staged).subspan(off, A);
        scale_to(CSpan(w.u).subspan(off, A), kPullbackH, Span(w.hv));
        m.exp_raw(y, w.hv, Span(w.probe));
        m.log_raw(x, w.probe, Span(w.l1));
        m.log_raw(x, y, Span(w.l0));
        Span out = k_out.subspan(off, A);
        for (int a = 0; a < A; ++a)
            out[static_cast<std::size_t>(a)] =
                (w.l1[static_cast<std::size_t>(a)] -
                 w.l0[static_cast<std::size_t>(a)]) / kPullbackH;
    }
}

void rk4_step_raw(const Manifold& m, Span X, CSpan masses, int n,
                  const PairWeightEval& weight, double dt, Rk4Work& w,
                  TaskPool* pool) {
    const int A = m.ambient_dim();
    w.resize(n, A);
    velocity_field_raw(m, X, masses, n, weight, Span(w.k1), w.vel, pool);
    stage_velocity(m, X, masses, n, weight, w.k1, 0.5 * dt, Span(w.k2), w,
                   pool);
    stage_velocity(m, X, masses, n, weight, w.k2, 0.5 * dt, Span(w.k3), w,
                   pool);
    stage_velocity(m, X, masses, n, weight, w.k3, dt, Span(w.k4), w, pool);
    const double c = dt / 6.0;
    for (std::size_t a = 0; a < w.combo.size(); ++a)
        w.combo[a] = c * (w.k1[a] + 2.0 * w.k2[a] + 2.0 * w.k3[a] + w.k4[a]);
    for (int i = 0; i < n; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * A;
        copy_to(CSpan(X).subspan(off, A), Span(w.hv));
        m.exp_raw(w.hv, CSpan(w.combo).subspan(off, A), X.subspan(off, A));
    }
}

std::vector<double> flatten(const ParticleEnsemble& e) {
    const int A = e.manifold->ambient_dim();
    std::vector<double> X(static_cast<std::size_t>(e.size()) * A);
    for (int i = 0; i < e.size(); ++i)
        copy_to(e.points[static_cast<std::size_t>(i)].coords,
                Span(X).subspan(static_cast<std::size_t>(i) * A, A));
    return X;
}

ParticleEnsemble unflatten(const ParticleEnsemble& like, CSpan X) {
    const int A = like.manifold->ambient_dim();
    std::vector<ManifoldPoint> pts;
    pts.reserve(like.points.size());
    for (int i = 0; i < like.size(); ++i) {
        std::vector<double> c(X.begin() + static_cast<std::size_t>(i) * A,
                              X.begin() + static_cast<std::size_t>(i + 1) * A);
        pts.push_back({like.manifold->kind(), std::move(c)});
    }
    return make_ensemble(like.manifold, std::move(pts), like.masses);
}

}  // namespace

std::vector<TangentVector> velocity_field(const ParticleEnsemble& e,
                                          const PotentialSpec& p,
                                          int workers) {
    const Manifold& m = *e.manifold;
    const int n = e.size();
    const int A = m.ambient_dim();
    const PairWeightEval weight(p);
    VelocityWork work;
    std::vector<double> X = flatten(e);
    std::vector<double> V(X.size());
    if (workers > 1) {
        TaskPool pool(workers);
        velocity_field_raw(m, X, e.masses, n, weight, Span(V), work, &pool);
    } else {
        velocity_field_raw(m, X, e.masses, n, weight, Span(V), work,
                           nullptr);
    }
    std::vector<TangentVector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(V.begin() + static_cast<std::size_t>(i) * A,
                              V.begin() + static_cast<std::size_t>(i + 1) * A);
        out.push_back({e.points[static_cast<std::size_t>(i)], std::move(v)});
    }
    return out;
}

ParticleEnsemble rk4_step(const ParticleEnsemble& e, const PotentialSpec& p,
                          double dt, int workers, StepStats* stats) {
    if (!(dt > 0.0)) throw UsageError("rk4_step needs dt > 0");
    const Manifold& m = *e.manifold;
    const PairWeightEval weight(p);
    Rk4Work work;
    std::vector<double> X = flatten(e);
    if (workers > 1) {
        TaskPool pool(workers);
        rk4_step_raw(m, Span(X), e.masses, e.size(), weight, dt, work,
                     &pool);
    } else {
        rk4_step_raw(m, Span(X), e.masses, e.size(), weight, dt, work,
                     nullptr);
    }
    if (stats) {
        const int A = m.ambient_dim();
        double drain = 0.0;  // k1 is the exact field at the pre-step state
        for (int i = 0; i < e.size(); ++i) {
            const CSpan ki =
                CSpan(work.k1).subspan(static_cast<std::size_t>(i) * A, A);
            drain += e.masses[static_cast<std::size_t>(i)] *
                     m.inner_raw(ki, ki);
        }
        stats->dissipation = drain;
    }
    return unflatten(e, X);  // re-validates the ensemble invariants
}

void simulate_stream(
    const ParticleEnsemble& initial, const PotentialSpec& p,
    const SimulationConfig& cfg, int workers,
    const std::function<void(long long, double, CSpan, double)>& observe) {
    const Manifold& m = *initial.manifold;
    if (!observe) throw UsageError("simulate_stream needs an observer");
    if (!(cfg.dt > 0.0)) throw UsageError("simulate needs dt > 0");
    if (!(cfg.t_end >= 0.0)) throw UsageError("simulate needs t_end >= 0");
    if (cfg.snapshot_stride < 1)
        throw UsageError("snapshot_stride must be >= 1");
    m.distance(cfg.center, cfg.center);  // kind check
    const Radii rr = radii(m.descriptor());
    if (!(cfg.ball_radius_r > 0.0) || !(cfg.ball_radius_r < rr.r_w))
        throw UsageError(
            "ball radius " + std::to_string(cfg.ball_radius_r) +
            " must satisfy 0 < r < r_w = " + std::to_string(rr.r_w) +
            " so geodesic balls stay strongly convex");

    const long long n_steps = std::llround(cfg.t_end / cfg.dt);
    if (std::abs(static_cast<double>(n_steps) * cfg.dt - cfg.t_end) >
        1e-9 * std::max(1.0, cfg.t_end))
        throw UsageError("t_end must be an integer multiple of dt");

    const int n = initial.size();
    const int A = m.ambient_dim();
    for (int i = 0; i < n; ++i) {
        const double d = m.distance_raw(
            initial.points[static_cast<std::size_t>(i)].coords,
            cfg.center.coords);
        if (!(d <= cfg.ball_radius_r + kSupportTol))
            throw UsageError("initial point " + std::to_string(i) + " lies " +
                             std::to_string(d) + " from the center, outside "
                             "the declared support radius " +
                             std::to_string(cfg.ball_radius_r));
    }

    const PairWeightEval weight(p);
    Rk4Work work;
    std::vector<double> X = flatten(initial);
    std::vector<double> Xprev(X.size());
    std::unique_ptr<TaskPool> pool;
    if (workers > 1) pool = std::make_unique<TaskPool>(workers);

    const auto drain_from = [&](CSpan V) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += initial.masses[static_cast<std::size_t>(i)] *
                   m.inner_raw(V.subspan(static_cast<std::size_t>(i) * A, A),
                               V.subspan(static_cast<std::size_t>(i) * A, A));
        return acc;
    };

    for (long long step = 1; step <= n_steps; ++step) {
        const double t = static_cast<double>(step) * cfg.dt;
        copy_to(X, Span(Xprev));
        try {
            rk4_step_raw(m, Span(X), initial.masses, n, weight, cfg.dt, work,
                         pool.get());
        } catch (const CutLocusError& err) {
            throw NumericalError(std::string("step failed at t = ") +
                                     std::to_string(t) + ": " + err.what() +
                                     "; a smaller dt may help",
                                 t);
        }
        // the k1 stage is the exact field at the pre-step state, so the
        // state at step-1 is reported once its successor is computed
        observe(step - 1, t - cfg.dt, Xprev, drain_from(work.k1));
        // r < r_w <= inj/2, so staying in the ball also keeps every
        // pairwise distance below the injectivity radius.
        for (int i = 0; i < n; ++i) {
            const double d = m.distance_raw(
                CSpan(X).subspan(static_cast<std::size_t>(i) * A, A),
                cfg.center.coords);
            if (!(d <= cfg.ball_radius_r + kBallEscapeTol))
                throw NumericalError(
                    "particle " + std::to_string(i) + " escaped the "
                    "invariant ball at t = " + std::to_string(t) + " (" +
                    std::to_string(d) + " > " +
                    std::to_string(cfg.ball_radius_r) +
                    " + tolerance); a smaller dt may help",
                    t);
        }
    }
    // final (or only) state: one dedicated field evaluation
    std::vector<double> V(X.size());
    VelocityWork vwork;
    velocity_field_raw(m, X, initial.masses, n, weight, Span(V), vwork,
                       pool.get());
    observe(n_steps, static_cast<double>(n_steps) * cfg.dt, X,
            drain_from(V));
}

Trajectory simulate(const ParticleEnsemble& initial, const PotentialSpec& p,
                    const SimulationConfig& cfg, int workers) {
    Trajectory traj;
    traj.config = cfg;
    const long long n_steps =
        cfg.dt > 0.0 ? std::llround(cfg.t_end / cfg.dt) : 0;
    simulate_stream(
        initial, p, cfg, workers,
        [&](long long step, double t, CSpan X, double) {
            if (step == 0) {
                traj.times.push_back(0.0);
                traj.states.push_back(initial);
                return;
            }
            if (step % cfg.snapshot_stride == 0 || step == n_steps) {
                traj.times.push_back(t);
                traj.states.push_back(unflatten(initial, X));
            }
        });
    return traj;
}

std::function<double(double)> two_body_reference(double d0,
                                                 const PotentialSpec& p) {
    if (p.kind != PotentialKind::power_law)
        throw UsageError("two_body_reference covers power_law potentials "
                         "only");
    validate(p);
    if (!(d0 >= 0.0)) throw UsageError("two_body_reference needs d0 >= 0");
    const double beta = p.beta;
    if (beta == 2.0)
        return [d0](double t) { return d0 * std::exp(-t); };
    return [d0, beta](double t) {
        const double em2 = 2.0 - beta;  // negative
        return std::pow(std::pow(d0, em2) + (beta - 2.0) * t, 1.0 / em2);
    };
}

}  // namespace geoflow
