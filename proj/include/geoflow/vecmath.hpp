#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace geoflow {

using Span = std::span<double>;
using CSpan = std::span<const double>;

inline double dot(CSpan a, CSpan b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double nrm2(CSpan a) { return std::sqrt(dot(a, a)); }

inline void copy_to(CSpan src, Span dst) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
}

inline void scale_to(CSpan src, double c, Span dst) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = c * src[i];
}

// dst += c * src
inline void axpy(double c, CSpan src, Span dst) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += c * src[i];
}

inline void fill_zero(Span dst) {
    for (double& x : dst) x = 0.0;
}

// Unit quaternion, scalar-first storage [w, x, y, z].
struct Quat {
    double w, x, y, z;

    static Quat from(CSpan q) { return {q[0], q[1], q[2], q[3]}; }
    void to(Span out) const { out[0] = w; out[1] = x; out[2] = y; out[3] = z; }

    Quat conj() const { return {w, -x, -y, -z}; }

    // Hamilton product.
    Quat mul(const Quat& r) const {
        return {w * r.w - x * r.x - y * r.y - z * r.z,
                w * r.x + x * r.w + y * r.z - z * r.y,
                w * r.y - x * r.z + y * r.w + z * r.x,
                w * r.z + x * r.y - y * r.x + z * r.w};
    }

    double vec_norm() const { return std::sqrt(x * x + y * y + z * z); }
};

}  // namespace geoflow
