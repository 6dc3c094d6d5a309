#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geoflow/ensemble.hpp"
#include "geoflow/potential.hpp"

namespace geoflow {

// Output targets; empty string means "not requested / use the runner's
// default under --out".
struct OutputPaths {
    std::string csv;
    std::string jsonl;
    std::string report;
    std::string svg;
};

// One experiment, as read from a JSON config file.  Field names in the
// file mirror the member names below; unknown keys anywhere are hard
// errors so a typo cannot silently change an experiment.
struct ExperimentConfig {
    std::string manifold;  // "euclidean:<n>" | "sphere" | "hyperbolic" | "so3"
    PotentialSpec potential;
    int n = 0;
    std::vector<double> masses;  // empty = uniform
    SamplingScheme sampling;
    std::uint64_t seed = 0;
    std::vector<double> center;   // empty = manifold origin
    double ball_radius = 0.0;     // 0 = sampling.radius
    double dt = 0.0;
    double t_end = 0.0;
    int snapshot_stride = 10;
    OutputPaths outputs;
};

// Parses and validates; throws UsageError with the offending key or bound
// in the message.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace geoflow
