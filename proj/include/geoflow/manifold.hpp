#pragma once

#include <memory>
#include <string>
#include <vector>

#include "geoflow/vecmath.hpp"

namespace geoflow {

enum class ManifoldKind { euclidean, sphere, hyperbolic, so3 };

std::string to_string(ManifoldKind kind);

// Static geometric data for one backend.  Curvature bounds are exact for
// these constant-curvature spaces; injectivity_radius may be +inf.
struct ManifoldDescriptor {
    ManifoldKind kind{};
    int dim = 0;  // intrinsic dimension
    double curvature_lower = 0.0;
    double curvature_upper = 0.0;
    double injectivity_radius = 0.0;
};

// A point in the backend's ambient representation:
//   euclidean:n  -> n coordinates
//   sphere       -> unit 3-vector
//   hyperbolic   -> hyperboloid sheet z^2 - x^2 - y^2 = 1, z > 0
//   so3          -> unit quaternion [w,x,y,z] with w >= 0
// The kind tag lets operations reject points from a different backend.
struct ManifoldPoint {
    ManifoldKind kind{};
    std::vector<double> coords;
};

// Tangent vector stored in the same ambient coordinates as its base point.
struct TangentVector {
    ManifoldPoint base;
    std::vector<double> vec;
};

// One geometry backend.  The raw_* layer works on bare coordinate spans
// with no validation (hot paths); the value layer validates and wraps.
class Manifold {
public:
    virtual ~Manifold() = default;

    const ManifoldDescriptor& descriptor() const { return desc_; }
    ManifoldKind kind() const { return desc_.kind; }
    int ambient_dim() const { return ambient_; }

    // Canonical center: origin / north pole / hyperboloid apex / identity.
    ManifoldPoint origin() const;

    // Validates and canonicalizes coordinates.  Drift below 1e-6 from the
    // representation constraint is projected away; anything larger (or a
    // structurally invalid value such as the wrong sheet) is a usage error.
    ManifoldPoint make_point(std::vector<double> coords) const;

    // Validates tangency (defect above 1e-10 is a usage error).
    TangentVector make_tangent(const ManifoldPoint& base,
                               std::vector<double> vec) const;
    TangentVector zero_tangent(const ManifoldPoint& base) const;

    double distance(const ManifoldPoint& a, const ManifoldPoint& b) const;
    ManifoldPoint exp(const ManifoldPoint& base, const TangentVector& v) const;
    TangentVector log(const ManifoldPoint& base,
                      const ManifoldPoint& target) const;
    double inner(const TangentVector& u, const TangentVector& v) const;
    double norm(const TangentVector& v) const;

    // Geodesic angle at `vertex` between the directions toward a and b.
    double angle(const ManifoldPoint& vertex, const ManifoldPoint& a,
                 const ManifoldPoint& b) const;

    // Law-of-cosines comparison defect for the triangle (x, y, z) with the
    // angle taken at vertex z, against the model space of curvature
    // mu = curvature_upper.  Nonnegative when the comparison bound holds;
    // zero (up to rounding) at constant curvature mu.
    double cosine_law_defect(const ManifoldPoint& x, const ManifoldPoint& y,
                             const ManifoldPoint& z) const;

    // --- raw layer -------------------------------------------------------
    virtual double distance_raw(CSpan a, CSpan b) const = 0;
    // exp projects its output back onto the representation constraint and
    // returns `base` bitwise when v == 0.
    virtual void exp_raw(CSpan base, CSpan v, Span out) const = 0;
    // Returns the distance; throws CutLocusError once the target is within
    // 1e-9 of the cut locus.
    virtual double log_raw(CSpan base, CSpan target, Span out) const = 0;
    virtual double inner_raw(CSpan u, CSpan v) const = 0;
    // Fused distance + both directional logs for one unordered pair; the
    // shared intermediate makes this the cheap path for pair sweeps.
    virtual void log_pair_raw(CSpan a, CSpan b, Span log_ab, Span log_ba,
                              double& dist) const;
    virtual void project_raw(Span coords) const = 0;
    virtual double constraint_defect(CSpan coords) const = 0;
    virtual double tangency_defect(CSpan base, CSpan v) const = 0;
    // Flat backends transport stage velocities exactly (identity on
    // coordinates); curved ones go through the finite-difference pullback.
    virtual bool flat() const { return false; }

protected:
    Manifold(ManifoldDescriptor desc, int ambient)
        : desc_(desc), ambient_(ambient) {}
    void check_kind(const ManifoldPoint& p) const;

    ManifoldDescriptor desc_;
    int ambient_;
};

// dim is only meaningful for euclidean (default 2 when omitted elsewhere).
std::shared_ptr<const Manifold> make_manifold(ManifoldKind kind, int dim = 0);

// Parses "euclidean:n", "sphere", "hyperbolic", "so3".
std::shared_ptr<const Manifold> make_manifold(const std::string& spec);

// Unit quaternion for a rotation of `angle` about `axis` (normalized here).
std::vector<double> so3_from_axis_angle(const double (&axis)[3], double angle);

}  // namespace geoflow
