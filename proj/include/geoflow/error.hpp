#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace geoflow {

// Caller handed us something that can never work: bad config, mismatched
// manifolds, violated precondition.  CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Valid request that failed numerically at runtime (divergence, loss of
// invariants).  CLI maps this to exit code 3.  `time` is the simulation
// time at which the failure occurred, NaN when not applicable.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg,
                            double when = std::nan(""))
        : std::runtime_error(msg), time(when) {}
    double time;
};

// Geodesic quantities requested at or beyond the cut locus.
struct CutLocusError : NumericalError {
    explicit CutLocusError(const std::string& msg,
                           double when = std::nan(""))
        : NumericalError(msg, when) {}
};

}  // namespace geoflow
