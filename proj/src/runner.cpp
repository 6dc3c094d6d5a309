#include "geoflow/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "geoflow/dynamics.hpp"
#include "geoflow/error.hpp"
#include "geoflow/io.hpp"
#include "geoflow/propcheck.hpp"

namespace geoflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kFigureN = 40;
constexpr double kFigureRadius = kPi / 4.0;

// weak-demo pass thresholds
constexpr double kWeakTailTol = 1e-6;
constexpr double kWeakDiameterSlack = 1e-3;

const char* fit_model_name(FitModel m) {
    return m == FitModel::exponential ? "exponential" : "power";
}

const char* attraction_name(AttractionClass c) {
    switch (c) {
        case AttractionClass::strong: return "strong";
        case AttractionClass::weak: return "weak";
        case AttractionClass::attractive_only: return "attractive_only";
    }
    return "?";
}

json fit_json(const RateFit& f) {
    return json{{"model", fit_model_name(f.model)},
                {"slope", f.slope},
                {"intercept", f.intercept},
                {"window", {f.t_start, f.t_end}},
                {"r_squared", f.r_squared},
                {"reliable", f.reliable}};
}

fs::path resolve_out(const std::string& configured, const RunnerOptions& opt,
                     const char* fallback) {
    if (!configured.empty()) return fs::path(configured);
    return fs::path(opt.out_dir) / fallback;
}

void emit(const fs::path& path, const std::string& bytes) {
    write_file_atomic(path, bytes);
    std::cout << "wrote " << path.string() << "\n";
}

std::vector<std::pair<double, double>> diameter_pairs(
    const std::vector<TimeSeriesRecord>& series) {
    std::vector<std::pair<double, double>> out;
    out.reserve(series.size());
    for (const auto& r : series) out.emplace_back(r.t, r.diameter);
    return out;
}

PlotInput diameter_plot(std::string title, FitModel model,
                        const std::vector<TimeSeriesRecord>& series,
                        bool has_fit, const RateFit& fit) {
    PlotInput in;
    in.title = std::move(title);
    in.model = model;
    in.t.reserve(series.size());
    in.y.reserve(series.size());
    for (const auto& r : series) {
        in.t.push_back(r.t);
        in.y.push_back(r.diameter);
    }
    in.has_fit = has_fit;
    in.fit = fit;
    return in;
}

// Everything a config-driven run produces before artifact writing.
struct RunProducts {
    std::shared_ptr<const Manifold> manifold;
    ManifoldPoint center;
    double ball_r = 0.0;
    std::uint64_t seed = 0;
    Trajectory traj;
    std::vector<TimeSeriesRecord> series;
};

RunProducts run_experiment(const ExperimentConfig& cfg,
                           const RunnerOptions& opt) {
    RunProducts out;
    out.manifold = make_manifold(cfg.manifold);
    out.center = cfg.center.empty() ? out.manifold->origin()
                                    : out.manifold->make_point(cfg.center);
    out.seed = opt.has_seed ? opt.seed : cfg.seed;
    out.ball_r = cfg.ball_radius > 0.0 ? cfg.ball_radius : cfg.sampling.radius;

    auto points =
        sample_ball(*out.manifold, out.center, cfg.sampling, out.seed, cfg.n);
    auto masses = cfg.masses.empty() ? uniform_masses(cfg.n) : cfg.masses;
    auto initial =
        make_ensemble(out.manifold, std::move(points), std::move(masses));

    SimulationConfig sim;
    sim.dt = cfg.dt;
    sim.t_end = cfg.t_end;
    sim.snapshot_stride = cfg.snapshot_stride;
    sim.center = out.center;
    sim.ball_radius_r = out.ball_r;
    sim.seed = out.seed;

    out.traj = simulate(initial, cfg.potential, sim, opt.workers);
    out.series = trajectory_diagnostics(out.traj, cfg.potential);
    return out;
}

}  // namespace

const std::vector<FigureCase>& figure_cases() {
    // Horizons chosen so the trailing-quarter fit window sits well inside
    // the asymptotic regime for each exponent while the full study stays
    // fast; beta = 2 decays exponentially, the rest algebraically.
    static const std::vector<FigureCase> cases = {
        {2.0, 1e-2, 15.0, FitModel::exponential, -1.0, 0.05},
        {3.0, 1e-2, 200.0, FitModel::power, -1.0, 0.05},
        {4.0, 1e-2, 400.0, FitModel::power, -0.5, 0.05},
        {8.0, 1e-2, 1000.0, FitModel::power, -1.0 / 6.0, 0.05},
    };
    return cases;
}

std::uint64_t figure_default_seed() { return 2024; }

FigureRunResult run_figure_case(const FigureCase& c, std::uint64_t seed,
                                int workers, bool with_rate_columns) {
    FigureRunResult out;
    out.c = c;

    const auto t0 = std::chrono::steady_clock::now();

    auto m = make_manifold(ManifoldKind::so3);
    const ManifoldPoint center = m->origin();
    const int n = kFigureN;
    const int ad = m->ambient_dim();

    PotentialSpec p;
    p.kind = PotentialKind::power_law;
    p.beta = c.beta;

    SamplingScheme scheme;
    scheme.kind = SamplingKind::so3_angle_axis;
    scheme.radius = kFigureRadius;

    auto masses = uniform_masses(n);
    auto initial =
        make_ensemble(m, sample_ball(*m, center, scheme, seed, n), masses);

    SimulationConfig sim;
    sim.dt = c.dt;
    sim.t_end = c.t_end;
    sim.snapshot_stride = 1;
    sim.center = center;
    sim.ball_radius_r = kFigureRadius;
    sim.seed = seed;

    const long long n_steps = std::llround(c.t_end / c.dt);
    out.series.reserve(static_cast<std::size_t>(n_steps) + 1);
    std::vector<double> diss;
    diss.reserve(static_cast<std::size_t>(n_steps) + 1);

    const double g0 = g_value(p, 0.0);
    double diag_energy = 0.0;
    for (double mi : masses) diag_energy += 0.5 * mi * mi * g0;
    const CSpan cc(center.coords);
    const std::size_t adz = static_cast<std::size_t>(ad);

    simulate_stream(
        initial, p, sim, workers,
        [&](long long, double t, CSpan coords, double dissipation) {
            double diam = 0.0;
            double energy = diag_energy;
            double max_cd = 0.0;
            for (int i = 0; i < n; ++i) {
                const CSpan xi =
                    coords.subspan(static_cast<std::size_t>(i) * adz, adz);
                max_cd = std::max(max_cd, m->distance_raw(cc, xi));
                for (int j = i + 1; j < n; ++j) {
                    const CSpan xj =
                        coords.subspan(static_cast<std::size_t>(j) * adz, adz);
                    const double d = m->distance_raw(xi, xj);
                    diam = std::max(diam, d);
                    energy += masses[static_cast<std::size_t>(i)] *
                              masses[static_cast<std::size_t>(j)] *
                              g_value(p, d * d);
                }
            }
            TimeSeriesRecord rec;
            rec.t = t;
            rec.diameter = diam;
            rec.energy = energy;
            out.series.push_back(rec);
            diss.push_back(dissipation);
            out.max_center_distance = std::max(out.max_center_distance, max_cd);
        });

    // energy balance against the estimated dE/dt at interior snapshots,
    // plus the worst step-to-step energy increase
    std::vector<double> times(out.series.size()), energies(out.series.size());
    for (std::size_t k = 0; k < out.series.size(); ++k) {
        times[k] = out.series[k].t;
        energies[k] = out.series[k].energy;
    }
    for (std::size_t k = 0; k < out.series.size(); ++k) {
        if (k > 0) {
            out.max_energy_increase =
                std::max(out.max_energy_increase,
                         out.series[k].energy - out.series[k - 1].energy);
        }
        if (k > 0 && k + 1 < out.series.size()) {
            const double est = energy_rate_estimate(times, energies, k);
            const double res = std::abs(est + diss[k]);
            out.series[k].dissipation_residual = res;
            out.max_residual_rel = std::max(
                out.max_residual_rel, res / std::max(1.0, std::abs(est)));
        }
    }

    out.initial_diameter = out.series.front().diameter;
    out.final_diameter = out.series.back().diameter;

    out.fit = c.model == FitModel::exponential
                  ? fit_exponential(diameter_pairs(out.series))
                  : fit_power(diameter_pairs(out.series));
    out.slope_ok = std::abs(out.fit.slope - c.target_slope) <= c.band;

    out.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    // untimed extras: contraction-integral columns and the decay envelope
    if (with_rate_columns) {
        std::vector<double> times, diams;
        times.reserve(out.series.size());
        diams.reserve(out.series.size());
        for (const auto& r : out.series) {
            times.push_back(r.t);
            diams.push_back(r.diameter);
        }
        const auto pts = rate_bound_series(times, diams, m->descriptor(),
                                           kFigureRadius, p);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            out.series[k].rate_lhs = pts[k].lhs;
            out.series[k].rate_rhs = pts[k].rhs;
            out.max_rate_violation =
                std::max(out.max_rate_violation, pts[k].lhs - pts[k].rhs);
        }
        out.has_rate_columns = true;
    }
    {
        const auto pred = predicted_rate(p, m->descriptor(), kFigureRadius,
                                         out.initial_diameter);
        for (const auto& r : out.series) {
            out.max_envelope_violation = std::max(
                out.max_envelope_violation, r.diameter - pred.envelope(r.t));
        }
    }

    out.csv = csv_from_series(out.series);
    return out;
}

int cmd_simulate(const ExperimentConfig& cfg, const RunnerOptions& opt) {
    const auto run = run_experiment(cfg, opt);
    const auto& p = cfg.potential;
    const auto& md = run.manifold->descriptor();
    const auto& last = run.series.back();

    json report;
    report["experiment"] = {{"manifold", cfg.manifold},
                            {"potential", to_string(p.kind)},
                            {"n", cfg.n},
                            {"dt", cfg.dt},
                            {"t_end", cfg.t_end},
                            {"snapshot_stride", cfg.snapshot_stride},
                            {"ball_radius", run.ball_r},
                            {"seed", run.seed}};
    report["final"] = {
        {"t", last.t}, {"diameter", last.diameter}, {"energy", last.energy}};

    const FitModel model = g_prime(p, 0.0) > 0.0 ? FitModel::exponential
                                                 : FitModel::power;
    RateFit fit;
    bool have_fit = false;
    try {
        fit = model == FitModel::exponential
                  ? fit_exponential(diameter_pairs(run.series))
                  : fit_power(diameter_pairs(run.series));
        have_fit = true;
        report["fit"] = fit_json(fit);
    } catch (const UsageError& err) {
        report["fit"] = nullptr;
        report["fit_error"] = err.what();
    }

    std::string why;
    if (rate_bound_applies(p, md, run.ball_r, &why)) {
        double worst = 0.0;
        for (const auto& r : run.series)
            if (r.rate_lhs && r.rate_rhs)
                worst = std::max(worst, *r.rate_lhs - *r.rate_rhs);
        json rb = {{"applies", true}, {"max_violation", worst}};
        if (p.kind == PotentialKind::power_law) {
            const auto pred =
                predicted_rate(p, md, run.ball_r, run.series.front().diameter);
            rb["bound_model"] = fit_model_name(pred.model);
            rb["bound_rate"] = pred.bound_rate;
            rb["exponent"] = pred.exponent;
        }
        report["rate_bound"] = rb;
    } else {
        report["rate_bound"] = {{"applies", false}, {"reason", why}};
    }

    emit(resolve_out(cfg.outputs.csv, opt, "run.csv"),
         csv_from_series(run.series));
    emit(resolve_out(cfg.outputs.jsonl, opt, "run.jsonl"),
         jsonl_from_trajectory(run.traj));
    emit(resolve_out(cfg.outputs.report, opt, "report.json"),
         report.dump(2) + "\n");
    if (opt.want_svg || !cfg.outputs.svg.empty()) {
        emit(resolve_out(cfg.outputs.svg, opt, "run.svg"),
             svg_rate_plot(diameter_plot("diameter decay", model, run.series,
                                         have_fit, fit)));
    }

    std::printf("final: t=%g diameter=%.9g energy=%.9g\n", last.t,
                last.diameter, last.energy);
    if (have_fit) {
        std::printf("fit: model=%s slope=%.6f r^2=%.7f window=[%g, %g]%s\n",
                    fit_model_name(fit.model), fit.slope, fit.r_squared,
                    fit.t_start, fit.t_end,
                    fit.reliable ? "" : "  (low r^2, not reliable)");
    }
    return 0;
}

int cmd_reproduce_figure1(const RunnerOptions& opt) {
    const std::uint64_t seed =
        opt.has_seed ? opt.seed : figure_default_seed();

    std::printf(
        "rotation-group decay study: n=%d, ball radius pi/4, seed=%llu\n",
        kFigureN, static_cast<unsigned long long>(seed));
    std::printf("%-6s %-8s %-12s %-11s %-16s %-10s %s\n", "beta", "t_end",
                "model", "slope", "target", "r^2", "verdict");

    json cases = json::array();
    bool all_ok = true;
    std::string first_bad;

    for (const auto& c : figure_cases()) {
        const auto res = run_figure_case(c, seed, opt.workers,
                                         /*with_rate_columns=*/false);
        const int b = static_cast<int>(std::llround(c.beta));
        char name[64];

        std::snprintf(name, sizeof name, "figure1_beta%d.csv", b);
        emit(fs::path(opt.out_dir) / name, res.csv);
        if (opt.want_svg) {
            std::snprintf(name, sizeof name, "figure1_beta%d.svg", b);
            char title[64];
            std::snprintf(title, sizeof title,
                          "rotation consensus decay, beta=%d", b);
            emit(fs::path(opt.out_dir) / name,
                 svg_rate_plot(diameter_plot(title, c.model, res.series, true,
                                             res.fit)));
        }

        char target[32];
        std::snprintf(target, sizeof target, "%.4f+-%.2f", c.target_slope,
                      c.band);
        std::printf("%-6d %-8g %-12s %-11.6f %-16s %-10.7f %s\n", b, c.t_end,
                    fit_model_name(c.model), res.fit.slope, target,
                    res.fit.r_squared, res.slope_ok ? "ok" : "OUT OF BAND");

        cases.push_back({{"beta", c.beta},
                         {"dt", c.dt},
                         {"t_end", c.t_end},
                         {"model", fit_model_name(c.model)},
                         {"slope", res.fit.slope},
                         {"r_squared", res.fit.r_squared},
                         {"window", {res.fit.t_start, res.fit.t_end}},
                         {"target_slope", c.target_slope},
                         {"band", c.band},
                         {"pass", res.slope_ok},
                         {"initial_diameter", res.initial_diameter},
                         {"final_diameter", res.final_diameter}});
        if (!res.slope_ok && first_bad.empty()) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "fitted slope %.6f for beta=%d misses %.4f +- %.2f",
                          res.fit.slope, b, c.target_slope, c.band);
            first_bad = msg;
            all_ok = false;
        }
    }

    json report = {{"seed", seed},
                   {"n", kFigureN},
                   {"ball_radius", kFigureRadius},
                   {"cases", cases}};
    emit(fs::path(opt.out_dir) / "figure1_report.json", report.dump(2) + "\n");

    if (!all_ok) {
        std::cerr << "error: " << first_bad << "\n";
        return 4;
    }
    std::printf("all fitted slopes inside their bands\n");
    return 0;
}

int cmd_verify_geometry(long long samples, const RunnerOptions& opt) {
    static const char* const kBackends[] = {"euclidean:3", "sphere",
                                            "hyperbolic", "so3"};
    const std::uint64_t seed = opt.has_seed ? opt.seed : 7;
    bool all_ok = true;
    for (const char* spec : kBackends) {
        const auto m = make_manifold(spec);
        const auto suites = run_geometry_suites(*m, samples, seed);
        std::cout << format_suite_report(suites);
        if (!all_passed(suites)) all_ok = false;
    }
    std::cout << (all_ok ? "geometry checks: all passed\n"
                         : "geometry checks: FAILURES (witnesses above)\n");
    return all_ok ? 0 : 4;
}

int cmd_weak_demo(const ExperimentConfig& cfg, const RunnerOptions& opt) {
    const auto m = make_manifold(cfg.manifold);
    const double ball_r =
        cfg.ball_radius > 0.0 ? cfg.ball_radius : cfg.sampling.radius;
    const double r_check = std::max(16.0, 8.0 * ball_r);
    const auto cls = classify(cfg.potential, m->descriptor(), r_check);
    if (cls.cls != AttractionClass::weak || !cls.zeta) {
        throw UsageError(
            std::string("weak-demo needs a potential with a dead zone and an "
                        "attractive tail; this one classifies as ") +
            attraction_name(cls.cls));
    }
    const double zeta = *cls.zeta;

    const auto run = run_experiment(cfg, opt);
    const auto& last = run.series.back();
    if (!last.weak_functional)
        throw UsageError("diagnostics did not produce the weak tail column");
    const double tail = *last.weak_functional;
    const bool pass =
        tail < kWeakTailTol && last.diameter <= zeta + kWeakDiameterSlack;

    json report = {
        {"zeta", zeta},
        {"final",
         {{"t", last.t},
          {"diameter", last.diameter},
          {"weak_functional", tail}}},
        {"thresholds",
         {{"weak_functional", kWeakTailTol},
          {"diameter_slack", kWeakDiameterSlack}}},
        {"pass", pass}};

    emit(resolve_out(cfg.outputs.csv, opt, "weak.csv"),
         csv_from_series(run.series));
    emit(resolve_out(cfg.outputs.jsonl, opt, "weak.jsonl"),
         jsonl_from_trajectory(run.traj));
    emit(resolve_out(cfg.outputs.report, opt, "weak_report.json"),
         report.dump(2) + "\n");
    if (opt.want_svg || !cfg.outputs.svg.empty()) {
        RateFit none{};
        emit(resolve_out(cfg.outputs.svg, opt, "weak.svg"),
             svg_rate_plot(diameter_plot("diameter plateau", FitModel::power,
                                         run.series, false, none)));
    }

    std::printf("dead zone zeta=%.9g\n", zeta);
    std::printf("final: t=%g diameter=%.9g weak_functional=%.3e\n", last.t,
                last.diameter, tail);
    if (pass) {
        std::printf("weak-demo: PASS (tail interactions extinguished, "
                    "diameter stalled within the dead zone)\n");
        return 0;
    }
    std::printf("weak-demo: FAIL (weak_functional=%.3e threshold=%.0e, "
                "diameter=%.9g limit=%.9g)\n",
                tail, kWeakTailTol, last.diameter, zeta + kWeakDiameterSlack);
    return 4;
}

int cmd_fit_rate(const std::string& csv_path, FitModel model,
                 double window_fraction, const RunnerOptions& opt) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + csv_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                return cells;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
    };
    const auto parse_num = [&](const std::string& cell, std::size_t lineno) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0')
            throw UsageError("bad number \"" + cell + "\" on line " +
                             std::to_string(lineno) + " of " + csv_path);
        return v;
    };

    std::vector<std::pair<double, double>> series;
    std::size_t t_col = 0, d_col = 0;
    bool have_cols = false;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = nl + 1;
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (!have_cols) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "t") t_col = i + 1;
                if (cells[i] == "diameter") d_col = i + 1;
            }
            if (t_col == 0 || d_col == 0)
                throw UsageError(csv_path +
                                 ": header must name t and diameter columns");
            have_cols = true;
            continue;
        }
        if (cells.size() < std::max(t_col, d_col))
            throw UsageError("short row on line " + std::to_string(lineno) +
                             " of " + csv_path);
        const std::string& dcell = cells[d_col - 1];
        if (dcell.empty()) continue;
        series.emplace_back(parse_num(cells[t_col - 1], lineno),
                            parse_num(dcell, lineno));
    }
    if (!have_cols) throw UsageError(csv_path + ": empty file");

    const RateFit fit = model == FitModel::exponential
                            ? fit_exponential(series, window_fraction)
                            : fit_power(series, window_fraction);

    json out = fit_json(fit);
    out["samples"] = series.size();
    std::cout << out.dump(2) << "\n";

    if (opt.want_svg) {
        PlotInput plot;
        plot.title = fs::path(csv_path).filename().string();
        plot.model = model;
        for (const auto& [t, y] : series) {
            plot.t.push_back(t);
            plot.y.push_back(y);
        }
        plot.has_fit = true;
        plot.fit = fit;
        emit(fs::path(opt.out_dir) /
                 (fs::path(csv_path).stem().string() + "_fit.svg"),
             svg_rate_plot(plot));
    }
    return 0;
}

}  // namespace geoflow
