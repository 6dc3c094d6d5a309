#pragma once

#include <cstdint>
#include <random>

namespace geoflow {

// Deterministic random source.  mt19937_64 has a standard-mandated output
// sequence, and the uniform/gaussian mappings below are written out by hand
// instead of using std::*_distribution (whose algorithms are
// implementation-defined), so a seed reproduces bit-for-bit everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, span).
    double uniform(double span) { return unit() * span; }

    // One standard normal via Box-Muller.  Consumes exactly two draws so
    // the stream stays aligned regardless of values.
    double gaussian() {
        double u1 = unit();
        double u2 = unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace geoflow
