#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "geoflow/analysis.hpp"
#include "geoflow/diagnostics.hpp"
#include "geoflow/dynamics.hpp"

namespace geoflow {

// Text artifacts are built fully in memory and hit disk through
// write_file_atomic, so readers never observe partial output.  All writers
// use '.' decimal separators and LF line endings; identical inputs produce
// byte-identical bytes.

// Header row, then one row per record.  Doubles print as %.17g (lossless
// round trip); unset optional diagnostics are empty cells, never zeros.
std::string csv_from_series(const std::vector<TimeSeriesRecord>& series);

// One snapshot per line: {"masses":[...],"points":[[...],...],"t":...}
// (fixed key order).
std::string jsonl_from_trajectory(const Trajectory& traj);

// Writes content to a temp file in the target directory, fsync-free, then
// renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Diameter-vs-time plot.  `model` picks the axes: semi-log (exponential)
// or log-log (power).  The fitted line is overlaid (dashed) across its
// window when a fit is supplied.
struct PlotInput {
    std::string title;
    FitModel model = FitModel::exponential;
    std::vector<double> t;
    std::vector<double> y;
    bool has_fit = false;
    RateFit fit{};
};
std::string svg_rate_plot(const PlotInput& in);

}  // namespace geoflow
