#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoflow/analysis.hpp"
#include "geoflow/config.hpp"
#include "geoflow/diagnostics.hpp"

namespace geoflow {

// Options shared by every subcommand (mostly parsed from global flags).
struct RunnerOptions {
    std::string out_dir = ".";
    int workers = 1;
    bool want_svg = false;
    bool has_seed = false;  // --seed was given; overrides config seeds
    std::uint64_t seed = 0;
};

// One curve of the rotation-group decay study: power-law exponent, step
// size, horizon, the fit model matching the predicted decay shape, and
// the slope band the fit has to land in.
struct FigureCase {
    double beta = 2.0;
    double dt = 1e-2;
    double t_end = 1.0;
    FitModel model = FitModel::exponential;
    double target_slope = 0.0;
    double band = 0.05;  // pass iff |slope - target_slope| <= band
};

// The four study cases (beta = 2, 3, 4, 8), in that order.
const std::vector<FigureCase>& figure_cases();
std::uint64_t figure_default_seed();

// Everything one study case produces in a single streaming pass: the
// per-step diagnostics series (with CSV bytes), the fitted decay rate,
// and worst-case margins for the checks graded downstream.
struct FigureRunResult {
    FigureCase c;
    std::vector<TimeSeriesRecord> series;
    std::string csv;
    RateFit fit;
    double initial_diameter = 0.0;
    double final_diameter = 0.0;
    double max_center_distance = 0.0;    // over all steps and particles
    double max_energy_increase = 0.0;    // max over steps of E(k+1) - E(k)
    double max_residual_rel = 0.0;       // residual / max(1, |dE/dt|)
    double max_rate_violation = 0.0;     // max over snapshots of lhs - rhs
    double max_envelope_violation = 0.0; // max of diameter - envelope(t)
    bool has_rate_columns = false;
    bool slope_ok = false;
    double elapsed_seconds = 0.0;  // integration + diagnostics + fit;
                                   // rate columns are untimed extras
};

// Runs one case: 40 rotations with uniform masses, angle-axis sampling of
// radius pi/4 around the identity, streamed at every step.  Setting
// with_rate_columns also evaluates the contraction-integral columns
// (expensive; excluded from elapsed_seconds).
FigureRunResult run_figure_case(const FigureCase& c, std::uint64_t seed,
                                int workers, bool with_rate_columns);

// Subcommand bodies; each returns the process exit code.
int cmd_simulate(const ExperimentConfig& cfg, const RunnerOptions& opt);
int cmd_reproduce_figure1(const RunnerOptions& opt);
int cmd_verify_geometry(long long samples, const RunnerOptions& opt);
int cmd_weak_demo(const ExperimentConfig& cfg, const RunnerOptions& opt);
int cmd_fit_rate(const std::string& csv_path, FitModel model,
                 double window_fraction, const RunnerOptions& opt);

}  // namespace geoflow
