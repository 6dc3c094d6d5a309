#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoflow/manifold.hpp"

namespace geoflow {

// Result of one randomized suite over one backend.  `worst` is the
// quantity the suite bounds (signed defect or error), `witness` serializes
// the first failing sample for replay.
struct SuiteResult {
    std::string suite;
    std::string manifold;
    long long samples = 0;
    long long failures = 0;
    double worst = 0.0;
    std::string witness;
};

// Randomized suites over one backend:
//   roundtrip      d(exp_x(log_x y), y) < 1e-10 for d(x,y) <= 0.9 inj,
//                  and | |log_x y| - d(x,y) | <= 1e-12
//   gradient       finite differences of t -> d(exp_x(t w), y)^2 match
//                  -2 <log_x y, w> to relative error 1e-6
//   triangle       d(x,y) <= d(x,z) + d(z,y) + 1e-12
//   cosine_law     comparison defect >= -1e-10 on triangles inside a ball
//                  of radius r_w; |defect| <= 1e-9 where the backend has
//                  constant curvature equal to the comparison bound
//   pair_contract  the two-sided log alignment bound against
//                  (C_mu/2) g'(d^2/4) d^2 has defect >= -1e-10 inside a
//                  ball of radius r < r_c, for power-law exponents 2 and 4
// All draws derive from `seed`, so runs replay exactly.
std::vector<SuiteResult> run_geometry_suites(const Manifold& m,
                                             long long samples,
                                             std::uint64_t seed);

bool all_passed(const std::vector<SuiteResult>& results);

std::string format_suite_report(const std::vector<SuiteResult>& results);

}  // namespace geoflow
