#include "geoflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCutLocusMargin = 1e-9;
constexpr double kSmallAngle = 1e-8;  // below this, two-term Taylor branches
constexpr double kPointDriftTol = 1e-6;
constexpr double kTangencyTol = 1e-10;

[[noreturn]] void throw_cut_locus(double d, double inj) {
    throw CutLocusError("log map requested at distance " + std::to_string(d) +
                        ", within " + std::to_string(kCutLocusMargin) +
                        " of the injectivity radius " + std::to_string(inj));
}

bool is_zero(CSpan v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

// ---------------------------------------------------------------- euclidean

class EuclideanManifold final : public Manifold {
public:
    explicit EuclideanManifold(int dim)
        : Manifold({ManifoldKind::euclidean, dim, 0.0, 0.0, kInf}, dim) {}

    double distance_raw(CSpan a, CSpan b) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    void exp_raw(CSpan base, CSpan v, Span out) const override {
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + v[i];
    }

    double log_raw(CSpan base, CSpan target, Span out) const override {
        for (std::size_t i = 0; i < base.size(); ++i)
            out[i] = target[i] - base[i];
        return nrm2(out);
    }

    double inner_raw(CSpan u, CSpan v) const override { return dot(u, v); }

    void project_raw(Span) const override {}
    double constraint_defect(CSpan) const override { return 0.0; }
    double tangency_defect(CSpan, CSpan) const override { return 0.0; }
    bool flat() const override { return true; }
};

// ------------------------------------------------------------------- sphere

class SphereManifold final : public Manifold {
public:
    SphereManifold() : Manifold({ManifoldKind::sphere, 2, 1.0, 1.0,
                                 3.14159265358979323846}, 3) {}

    double distance_raw(CSpan a, CSpan b) const override {
        // atan2(|a x b|, a.b) is stable at both ends of [0, pi], unlike
        // acos of the dot product.
        const double cx = a[1] * b[2] - a[2] * b[1];
        const double cy = a[2] * b[0] - a[0] * b[2];
        const double cz = a[0] * b[1] - a[1] * b[0];
        const double s = std::sqrt(cx * cx + cy * cy + cz * cz);
        return std::atan2(s, dot(a, b));
    }

    void exp_raw(CSpan base, CSpan v, Span out) const override {
        if (is_zero(v)) {
            copy_to(base, out);
            return;
        }
        const double h = nrm2(v);
        double ch, shh;  // cos(h), sin(h)/h
        if (h < kSmallAngle) {
            ch = 1.0 - 0.5 * h * h;
            shh = 1.0 - h * h / 6.0;
        } else {
            ch = std::cos(h);
            shh = std::sin(h) / h;
        }
        for (int i = 0; i < 3; ++i) out[i] = ch * base[i] + shh * v[i];
        project_raw(out);
    }

    double log_raw(CSpan base, CSpan target, Span out) const override {
        const double d = distance_raw(base, target);
        if (d >= desc_.injectivity_radius - kCutLocusMargin)
            throw_cut_locus(d, desc_.injectivity_radius);
        const double c = dot(base, target);
        for (int i = 0; i < 3; ++i) out[i] = target[i] - c * base[i];
        const double w = nrm2(out);
        const double scale = (w > 0.0) ? d / w : 0.0;
        for (int i = 0; i < 3; ++i) out[i] *= scale;
        return d;
    }

    double inner_raw(CSpan u, CSpan v) const override { return dot(u, v); }

    void project_raw(Span p) const override {
        const double n = nrm2(p);
        for (double& x : p) x /= n;
    }

    double constraint_defect(CSpan p) const override {
        return std::abs(nrm2(p) - 1.0);
    }

    double tangency_defect(CSpan base, CSpan v) const override {
        return std::abs(dot(base, v));
    }
};

// --------------------------------------------------------------- hyperbolic
// Hyperboloid model: points with z^2 - x^2 - y^2 = 1, z > 0; the metric is
// the restriction of the Minkowski form <u,v> = ux vx + uy vy - uz vz.

double mdot(CSpan a, CSpan b) {
    return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
}

class HyperbolicManifold final : public Manifold {
public:
    HyperbolicManifold()
        : Manifold({ManifoldKind::hyperbolic, 2, -1.0, -1.0, kInf}, 3) {}

    double distance_raw(CSpan a, CSpan b) const override {
        // 2 asinh(|a-b|_M / 2) stays accurate for nearby points, where
        // acosh(-<a,b>) loses half the significant digits.
        double q = 0.0;
        {
            const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
            q = d0 * d0 + d1 * d1 - d2 * d2;
        }
        return 2.0 * std::asinh(0.5 * std::sqrt(std::max(q, 0.0)));
    }

    void exp_raw(CSpan base, CSpan v, Span out) const override {
        if (is_zero(v)) {
            copy_to(base, out);
            return;
        }
        const double h = std::sqrt(std::max(mdot(v, v), 0.0));
        double ch, shh;
        if (h < kSmallAngle) {
            ch = 1.0 + 0.5 * h * h;
            shh = 1.0 + h * h / 6.0;
        } else {
            ch = std::cosh(h);
            shh = std::sinh(h) / h;
        }
        for (int i = 0; i < 3; ++i) out[i] = ch * base[i] + shh * v[i];
        project_raw(out);
    }

    double log_raw(CSpan base, CSpan target, Span out) const override {
        const double d = distance_raw(base, target);
        const double c = -mdot(base, target);  // cosh d
        for (int i = 0; i < 3; ++i) out[i] = target[i] - c * base[i];
        const double w = std::sqrt(std::max(mdot(out, out), 0.0));  // sinh d
        const double scale = (w > 0.0) ? d / w : 0.0;
        for (int i = 0; i < 3; ++i) out[i] *= scale;
        return d;
    }

    double inner_raw(CSpan u, CSpan v) const override { return mdot(u, v); }

    void project_raw(Span p) const override {
        // Graph projection: rescaling by the Minkowski norm moves the point
        // almost parallel to the sheet far from the apex (the ray through
        // the origin hugs the light cone), amplifying a tiny constraint
        // defect into a large tangential displacement.  Recomputing z from
        // (x, y) fixes the constraint exactly and moves the point by at
        // most defect / (2 z).
        p[2] = std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1]);
    }

    double constraint_defect(CSpan p) const override {
        if (p[2] <= 0.0) return kInf;  // wrong sheet is not projectable
        return std::abs(mdot(p, p) + 1.0);
    }

    double tangency_defect(CSpan base, CSpan v) const override {
        return std::abs(mdot(base, v));
    }
};

// ---------------------------------------------------------------------- so3
// Rotations as unit quaternions [w,x,y,z], canonicalized to w >= 0 so each
// rotation has one representative.  Distance is the relative rotation angle
// in [0, pi]; the ambient inner product is scaled by 4 so tangent norms
// agree with that distance.  Sectional curvature is the bi-invariant 1/4.

class So3Manifold final : public Manifold {
public:
    So3Manifold() : Manifold({ManifoldKind::so3, 3, 0.25, 0.25,
                              3.14159265358979323846}, 4) {}

    double distance_raw(CSpan a, CSpan b) const override {
        const Quat r = Quat::from(a).conj().mul(Quat::from(b));
        return 2.0 * std::atan2(r.vec_norm(), std::abs(r.w));
    }

    void exp_raw(CSpan base, CSpan v, Span out) const override {
        if (is_zero(v)) {
            copy_to(base, out);
            return;
        }
        const Quat q = Quat::from(base);
        const Quat om = q.conj().mul(Quat::from(v));  // body frame, pure
        const double h = om.vec_norm();
        double ch, shh;
        if (h < kSmallAngle) {
            ch = 1.0 - 0.5 * h * h;
            shh = 1.0 - h * h / 6.0;
        } else {
            ch = std::cos(h);
            shh = std::sin(h) / h;
        }
        const Quat g{ch, shh * om.x, shh * om.y, shh * om.z};
        q.mul(g).to(out);
        project_raw(out);
    }

    double log_raw(CSpan base, CSpan target, Span out) const override {
        const Quat q = Quat::from(base);
        Quat r = q.conj().mul(Quat::from(target));
        if (r.w < 0.0) r = {-r.w, -r.x, -r.y, -r.z};  // short geodesic
        const double s = r.vec_norm();
        const double d = 2.0 * std::atan2(s, r.w);
        if (d >= desc_.injectivity_radius - kCutLocusMargin)
            throw_cut_locus(d, desc_.injectivity_radius);
        // out = q * (0, (d/2) * axis); d/(2s) -> 1/w as s -> 0.
        const double scale =
            (s > kSmallAngle) ? d / (2.0 * s)
                              : (1.0 - s * s / (3.0 * r.w * r.w)) / r.w;
        const Quat om{0.0, scale * r.x, scale * r.y, scale * r.z};
        q.mul(om).to(out);
        return d;
    }

    double inner_raw(CSpan u, CSpan v) const override {
        return 4.0 * dot(u, v);
    }

    void log_pair_raw(CSpan a, CSpan b, Span log_ab, Span log_ba,
                      double& dist) const override {
        const Quat qa = Quat::from(a);
        const Quat qb = Quat::from(b);
        Quat r = qa.conj().mul(qb);
        if (r.w < 0.0) r = {-r.w, -r.x, -r.y, -r.z};
        const double s = r.vec_norm();
        const double d = 2.0 * std::atan2(s, r.w);
        if (d >= desc_.injectivity_radius - kCutLocusMargin)
            throw_cut_locus(d, desc_.injectivity_radius);
        const double scale =
            (s > kSmallAngle) ? d / (2.0 * s)
                              : (1.0 - s * s / (3.0 * r.w * r.w)) / r.w;
        // conj(r) is the relative rotation seen from b; same angle,
        // opposite axis.
        const Quat om{0.0, scale * r.x, scale * r.y, scale * r.z};
        qa.mul(om).to(log_ab);
        const Quat mo{0.0, -om.x, -om.y, -om.z};
        qb.mul(mo).to(log_ba);
        dist = d;
    }

    void project_raw(Span p) const override {
        const double n = nrm2(p);
        for (double& x : p) x /= n;
        if (p[0] < 0.0 ||
            (p[0] == 0.0 && first_nonzero(p.subspan(1)) < 0.0)) {
            for (double& x : p) x = -x;
        }
    }

    double constraint_defect(CSpan p) const override {
        return std::abs(nrm2(p) - 1.0);
    }

    double tangency_defect(CSpan base, CSpan v) const override {
        return std::abs(dot(base, v));
    }

private:
    static double first_nonzero(CSpan v) {
        for (double x : v)
            if (x != 0.0) return x;
        return 1.0;
    }
};

}  // namespace

// ----------------------------------------------------------- value layer

std::string to_string(ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::euclidean: return "euclidean";
        case ManifoldKind::sphere: return "sphere";
        case ManifoldKind::hyperbolic: return "hyperbolic";
        case ManifoldKind::so3: return "so3";
    }
    return "?";
}

void Manifold::check_kind(const ManifoldPoint& p) const {
    if (p.kind != desc_.kind)
        throw UsageError("point from manifold '" + to_string(p.kind) +
                         "' passed to manifold '" + to_string(desc_.kind) +
                         "'");
    if (static_cast<int>(p.coords.size()) != ambient_)
        throw UsageError("point has " + std::to_string(p.coords.size()) +
                         " coordinates; manifold '" + to_string(desc_.kind) +
                         "' expects " + std::to_string(ambient_));
}

ManifoldPoint Manifold::origin() const {
    std::vector<double> c(static_cast<std::size_t>(ambient_), 0.0);
    switch (desc_.kind) {
        case ManifoldKind::euclidean: break;
        case ManifoldKind::sphere: c[2] = 1.0; break;     // north pole
        case ManifoldKind::hyperbolic: c[2] = 1.0; break; // apex
        case ManifoldKind::so3: c[0] = 1.0; break;        // identity
    }
    return {desc_.kind, std::move(c)};
}

ManifoldPoint Manifold::make_point(std::vector<double> coords) const {
    if (static_cast<int>(coords.size()) != ambient_)
        throw UsageError("manifold '" + to_string(desc_.kind) + "' expects " +
                         std::to_string(ambient_) + " coordinates, got " +
                         std::to_string(coords.size()));
    const double defect = constraint_defect(coords);
    if (!(defect <= kPointDriftTol))
        throw UsageError("coordinates violate the representation constraint "
                         "of manifold '" + to_string(desc_.kind) +
                         "' (defect " + std::to_string(defect) + ")");
    project_raw(coords);
    return {desc_.kind, std::move(coords)};
}

TangentVector Manifold::make_tangent(const ManifoldPoint& base,
                                     std::vector<double> vec) const {
    check_kind(base);
    if (vec.size() != base.coords.size())
        throw UsageError("tangent vector size does not match its base point");
    const double defect = tangency_defect(base.coords, vec);
    if (!(defect <= kTangencyTol))
        throw UsageError("vector is not tangent at its base point (defect " +
                         std::to_string(defect) + ")");
    return {base, std::move(vec)};
}

TangentVector Manifold::zero_tangent(const ManifoldPoint& base) const {
    check_kind(base);
    return {base, std::vector<double>(base.coords.size(), 0.0)};
}

double Manifold::distance(const ManifoldPoint& a,
                          const ManifoldPoint& b) const {
    check_kind(a);
    check_kind(b);
    return distance_raw(a.coords, b.coords);
}

ManifoldPoint Manifold::exp(const ManifoldPoint& base,
                            const TangentVector& v) const {
    check_kind(base);
    check_kind(v.base);
    std::vector<double> out(base.coords.size());
    exp_raw(base.coords, v.vec, out);
    return {desc_.kind, std::move(out)};
}

TangentVector Manifold::log(const ManifoldPoint& base,
                            const ManifoldPoint& target) const {
    check_kind(base);
    check_kind(target);
    std::vector<double> out(base.coords.size());
    log_raw(base.coords, target.coords, out);
    return {base, std::move(out)};
}

double Manifold::inner(const TangentVector& u, const TangentVector& v) const {
    check_kind(u.base);
    check_kind(v.base);
    double mismatch = 0.0;
    for (std::size_t i = 0; i < u.base.coords.size(); ++i)
        mismatch = std::max(mismatch,
                            std::abs(u.base.coords[i] - v.base.coords[i]));
    if (mismatch > 1e-12)
        throw UsageError("inner product of tangent vectors at different "
                         "base points");
    return inner_raw(u.vec, v.vec);
}

double Manifold::norm(const TangentVector& v) const {
    check_kind(v.base);
    return std::sqrt(std::max(inner_raw(v.vec, v.vec), 0.0));
}

double Manifold::angle(const ManifoldPoint& vertex, const ManifoldPoint& a,
                       const ManifoldPoint& b) const {
    const TangentVector u = log(vertex, a);
    const TangentVector w = log(vertex, b);
    const double nu = norm(u);
    const double nw = norm(w);
    if (nu < 1e-15 || nw < 1e-15)
        throw UsageError("angle at a vertex coinciding with an endpoint is "
                         "degenerate");
    const double c = inner_raw(u.vec, w.vec) / (nu * nw);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double Manifold::cosine_law_defect(const ManifoldPoint& x,
                                   const ManifoldPoint& y,
                                   const ManifoldPoint& z) const {
    const TangentVector zx = log(z, x);
    const TangentVector zy = log(z, y);
    const double a = norm(zx);  // d(z, x)
    const double b = norm(zy);  // d(z, y)
    if (a < 1e-15 || b < 1e-15)
        throw UsageError("cosine-law defect is degenerate when the vertex "
                         "coincides with another corner");
    // Use the cosine of the vertex angle directly; an acos/cos round trip
    // would only add noise.
    const double cosang =
        std::clamp(inner_raw(zx.vec, zy.vec) / (a * b), -1.0, 1.0);
    const double dxy = distance(x, y);
    const double mu = desc_.curvature_upper;
    if (mu > 0.0) {
        const double rmu = std::sqrt(mu);
        return std::cos(rmu * a) * std::cos(rmu * b) +
               std::sin(rmu * a) * std::sin(rmu * b) * cosang -
               std::cos(rmu * dxy);
    }
    // mu <= 0: the comparison is against the Euclidean law.
    return dxy * dxy - (a * a + b * b - 2.0 * a * b * cosang);
}

void Manifold::log_pair_raw(CSpan a, CSpan b, Span log_ab, Span log_ba,
                            double& dist) const {
    dist = log_raw(a, b, log_ab);
    log_raw(b, a, log_ba);
}

std::shared_ptr<const Manifold> make_manifold(ManifoldKind kind, int dim) {
    switch (kind) {
        case ManifoldKind::euclidean:
            if (dim < 1)
                throw UsageError("euclidean manifold needs dimension >= 1");
            return std::make_shared<EuclideanManifold>(dim);
        case ManifoldKind::sphere:
            return std::make_shared<SphereManifold>();
        case ManifoldKind::hyperbolic:
            return std::make_shared<HyperbolicManifold>();
        case ManifoldKind::so3:
            return std::make_shared<So3Manifold>();
    }
    throw UsageError("unknown manifold kind");
}

std::shared_ptr<const Manifold> make_manifold(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    if (name == "euclidean") {
        if (colon == std::string::npos)
            throw UsageError("euclidean manifold spec needs a dimension, "
                             "e.g. \"euclidean:2\"");
        int dim = 0;
        try {
            dim = std::stoi(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad euclidean dimension in \"" + spec + "\"");
        }
        return make_manifold(ManifoldKind::euclidean, dim);
    }
    if (colon != std::string::npos)
        throw UsageError("manifold \"" + name + "\" takes no dimension");
    if (name == "sphere") return make_manifold(ManifoldKind::sphere);
    if (name == "hyperbolic") return make_manifold(ManifoldKind::hyperbolic);
    if (name == "so3") return make_manifold(ManifoldKind::so3);
    throw UsageError("unknown manifold \"" + spec + "\" (expected euclidean:n,"
                     " sphere, hyperbolic, or so3)");
}

std::vector<double> so3_from_axis_angle(const double (&axis)[3],
                                        double angle) {
    const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] +
                               axis[2] * axis[2]);
    if (n == 0.0) throw UsageError("rotation axis must be nonzero");
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    std::vector<double> q{std::cos(h), s * axis[0], s * axis[1], s * axis[2]};
    const double qn = nrm2(q);
    for (double& c : q) c /= qn;
    if (q[0] < 0.0)
        for (double& c : q) c = -c;
    return q;
}

}  // namespace geoflow
