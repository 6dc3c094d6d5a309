#include <doctest.h>

#include <cmath>
#include <vector>

#include "geoflow/error.hpp"
#include "geoflow/manifold.hpp"

using namespace geoflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent SO(3) oracle: 3x3 rotation matrices composed directly, the
// relative angle read off the trace.  No quaternions anywhere.
struct Mat3 {
    double a[3][3];
};

Mat3 rot_matrix(const double (&axis)[3], double angle) {
    const double n =
        std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    const double u[3] = {axis[0] / n, axis[1] / n, axis[2] / n};
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.a[i][j] = (1 - c) * u[i] * u[j] + (i == j ? c : 0.0);
    r.a[0][1] -= s * u[2];
    r.a[0][2] += s * u[1];
    r.a[1][0] += s * u[2];
    r.a[1][2] -= s * u[0];
    r.a[2][0] -= s * u[1];
    r.a[2][1] += s * u[0];
    return r;
}

double relative_angle(const Mat3& p, const Mat3& q) {
    // angle of p^T q
    double tr = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) tr += p.a[k][i] * q.a[k][i];
    const double c = std::min(1.0, std::max(-1.0, 0.5 * (tr - 1.0)));
    return std::acos(c);
}

}  // namespace

TEST_CASE("euclidean distance, exp, log are the affine operations") {
    auto m = make_manifold("euclidean:2");
    const auto a = m->make_point({1.0, 2.0});
    const auto b = m->make_point({4.0, 6.0});
    CHECK(m->distance(a, b) == doctest::Approx(5.0).epsilon(1e-15));

    const auto v = m->log(a, b);
    CHECK(v.vec[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(v.vec[1] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(m->norm(v) == doctest::Approx(5.0).epsilon(1e-15));

    const auto c = m->exp(a, v);
    CHECK(c.coords[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(c.coords[1] == doctest::Approx(6.0).epsilon(1e-15));

    const auto u = m->make_tangent(a, {1.0, 0.0});
    const auto w = m->make_tangent(a, {3.0, 4.0});
    CHECK(m->inner(u, w) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("sphere distances and maps match hand trigonometry") {
    auto m = make_manifold("sphere");
    const auto north = m->make_point({0.0, 0.0, 1.0});
    const double th = 0.7;
    const auto p = m->make_point({std::sin(th), 0.0, std::cos(th)});

    CHECK(m->distance(north, p) == doctest::Approx(th).epsilon(1e-14));

    // log at the pole points along +x with norm th
    const auto v = m->log(north, p);
    CHECK(v.vec[0] == doctest::Approx(th).epsilon(1e-13));
    CHECK(std::abs(v.vec[1]) < 1e-15);
    CHECK(std::abs(v.vec[2]) < 1e-15);

    const auto back = m->exp(north, v);
    CHECK(back.coords[0] == doctest::Approx(std::sin(th)).epsilon(1e-14));
    CHECK(back.coords[2] == doctest::Approx(std::cos(th)).epsilon(1e-14));

    // right angle at the pole between the x- and y-meridians
    const auto q = m->make_point({0.0, std::sin(0.4), std::cos(0.4)});
    CHECK(m->angle(north, p, q) == doctest::Approx(kPi / 2).epsilon(1e-12));

    CHECK(m->descriptor().injectivity_radius == doctest::Approx(kPi));
    CHECK(m->descriptor().curvature_upper == 1.0);
}

TEST_CASE("hyperboloid distances and maps match hand values") {
    auto m = make_manifold("hyperbolic");
    const auto apex = m->make_point({0.0, 0.0, 1.0});
    const double s = 1.2;
    const auto p = m->make_point({std::sinh(s), 0.0, std::cosh(s)});

    CHECK(m->distance(apex, p) == doctest::Approx(s).epsilon(1e-14));

    const auto v = m->log(apex, p);
    CHECK(v.vec[0] == doctest::Approx(s).epsilon(1e-13));
    CHECK(std::abs(v.vec[2]) < 1e-13);

    const auto back = m->exp(apex, v);
    CHECK(back.coords[0] == doctest::Approx(std::sinh(s)).epsilon(1e-13));
    CHECK(back.coords[2] == doctest::Approx(std::cosh(s)).epsilon(1e-13));

    // Minkowski metric on the tangent space at the apex is the plane metric
    const auto u = m->make_tangent(apex, {1.0, 0.0, 0.0});
    const auto w = m->make_tangent(apex, {0.0, 1.0, 0.0});
    CHECK(m->inner(u, w) == doctest::Approx(0.0));
    CHECK(m->norm(u) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(m->descriptor().curvature_upper == -1.0);
    CHECK(std::isinf(m->descriptor().injectivity_radius));
}

TEST_CASE("rotation distance equals the relative rotation angle") {
    auto m = make_manifold("so3");

    // coaxial rotations: distance is the angle difference, exactly
    const auto qa = m->make_point(so3_from_axis_angle({0, 0, 1}, 0.3));
    const auto qb = m->make_point(so3_from_axis_angle({0, 0, 1}, 0.9));
    CHECK(m->distance(qa, qb) == doctest::Approx(0.6).epsilon(1e-13));

    // skew axes: check against the rotation-matrix trace formula
    const double axes[4][3] = {
        {0, 0, 1}, {1, 0, 0}, {0.3, -1.2, 0.5}, {-2, 1, 4}};
    const double angles[4] = {0.3, 0.4, 1.9, 2.6};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const auto qi = m->make_point(so3_from_axis_angle(axes[i], angles[i]));
            const auto qj = m->make_point(so3_from_axis_angle(axes[j], angles[j]));
            const double want = relative_angle(rot_matrix(axes[i], angles[i]),
                                               rot_matrix(axes[j], angles[j]));
            CHECK(m->distance(qi, qj) == doctest::Approx(want).epsilon(1e-11));
        }
    }
}

TEST_CASE("rotation tangent norms use the angle scale") {
    auto m = make_manifold("so3");
    const auto id = m->origin();
    const double th = 1.1;
    const auto q = m->make_point(so3_from_axis_angle({0, 0, 1}, th));

    const auto v = m->log(id, q);
    CHECK(m->norm(v) == doctest::Approx(th).epsilon(1e-13));

    // quaternion-coordinate tangent (0,0,0,1/2) is a unit tangent
    const auto u = m->make_tangent(id, {0.0, 0.0, 0.0, 0.5});
    CHECK(m->norm(u) == doctest::Approx(1.0).epsilon(1e-15));

    const auto back = m->exp(id, v);
    for (int k = 0; k < 4; ++k)
        CHECK(back.coords[k] == doctest::Approx(q.coords[k]).epsilon(1e-13));

    CHECK(m->descriptor().curvature_upper == doctest::Approx(0.25));
    CHECK(m->descriptor().injectivity_radius == doctest::Approx(kPi));
}

TEST_CASE("axis-angle constructor normalizes the axis") {
    const auto a = so3_from_axis_angle({0, 0, 1}, 0.9);
    const auto b = so3_from_axis_angle({0, 0, 2}, 0.9);
    REQUIRE(a.size() == 4);
    CHECK(a[0] == doctest::Approx(std::cos(0.45)).epsilon(1e-15));
    CHECK(a[3] == doctest::Approx(std::sin(0.45)).epsilon(1e-15));
    for (int k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("antipodal rotations hit the cut locus") {
    auto m = make_manifold("so3");
    const auto id = m->origin();
    const auto near_pi =
        m->make_point(so3_from_axis_angle({0, 0, 1}, kPi - 1e-10));
    CHECK_THROWS_AS((void)m->log(id, near_pi), CutLocusError);

    // comfortably inside the cut locus still works
    const auto inside =
        m->make_point(so3_from_axis_angle({0, 0, 1}, kPi - 1e-3));
    CHECK(m->norm(m->log(id, inside)) ==
          doctest::Approx(kPi - 1e-3).epsilon(1e-12));
}

TEST_CASE("sphere log throws at the cut locus") {
    auto m = make_manifold("sphere");
    const auto north = m->make_point({0.0, 0.0, 1.0});
    const auto south = m->make_point({0.0, 0.0, -1.0});
    CHECK_THROWS_AS((void)m->log(north, south), CutLocusError);
}

TEST_CASE("quaternions are canonicalized to a nonnegative scalar part") {
    auto m = make_manifold("so3");
    const double w = std::cos(0.15), z = std::sin(0.15);
    const auto flipped = m->make_point({-w, 0.0, 0.0, -z});
    CHECK(flipped.coords[0] == doctest::Approx(w).epsilon(1e-15));
    CHECK(flipped.coords[3] == doctest::Approx(z).epsilon(1e-15));

    // the two lifts of one rotation are the same point
    const auto plain = m->make_point({w, 0.0, 0.0, z});
    CHECK(m->distance(plain, flipped) == doctest::Approx(0.0));
}

TEST_CASE("exp of the zero tangent returns the base bitwise") {
    for (const char* spec : {"euclidean:3", "sphere", "hyperbolic", "so3"}) {
        auto m = make_manifold(spec);
        const auto base = m->origin();
        const auto out = m->exp(base, m->zero_tangent(base));
        REQUIRE(out.coords.size() == base.coords.size());
        for (std::size_t k = 0; k < base.coords.size(); ++k)
            CHECK(out.coords[k] == base.coords[k]);
    }
}

TEST_CASE("make_point validates structure and projects small drift") {
    auto sphere = make_manifold("sphere");
    CHECK_THROWS_AS((void)sphere->make_point({1.1, 0.0, 0.0}), UsageError);
    CHECK_THROWS_AS((void)sphere->make_point({1.0, 0.0}), UsageError);
    const auto drifted = sphere->make_point({1.0 + 5e-7, 0.0, 0.0});
    CHECK(drifted.coords[0] == doctest::Approx(1.0).epsilon(1e-15));

    auto hyp = make_manifold("hyperbolic");
    CHECK_THROWS_AS((void)hyp->make_point({0.0, 0.0, -1.0}), UsageError);

    CHECK_THROWS_AS((void)make_manifold("euclidean:0"), UsageError);
    CHECK_THROWS_AS((void)make_manifold("moebius"), UsageError);
}

TEST_CASE("make_tangent rejects non-tangent vectors") {
    auto m = make_manifold("sphere");
    const auto north = m->make_point({0.0, 0.0, 1.0});
    CHECK_THROWS_AS((void)m->make_tangent(north, {0.0, 0.0, 0.5}), UsageError);
    const auto ok = m->make_tangent(north, {0.2, -0.1, 0.0});
    CHECK(m->norm(ok) == doctest::Approx(std::sqrt(0.05)).epsilon(1e-14));
}

TEST_CASE("operations reject points from a different backend") {
    auto sphere = make_manifold("sphere");
    auto hyp = make_manifold("hyperbolic");
    const auto a = sphere->make_point({0.0, 0.0, 1.0});
    const auto b = hyp->make_point({0.0, 0.0, 1.0});
    CHECK_THROWS_AS((void)sphere->distance(a, b), UsageError);
}

TEST_CASE("fused pair kernel agrees with the two directional logs") {
    auto m = make_manifold("so3");
    const auto qa = m->make_point(so3_from_axis_angle({1, 2, 0.5}, 1.1));
    const auto qb = m->make_point(so3_from_axis_angle({-0.3, 1, 2}, 0.7));

    std::vector<double> lab(4), lba(4);
    double d = 0.0;
    m->log_pair_raw(qa.coords, qb.coords, lab, lba, d);

    CHECK(d == doctest::Approx(m->distance(qa, qb)).epsilon(1e-14));
    const auto vab = m->log(qa, qb);
    const auto vba = m->log(qb, qa);
    for (int k = 0; k < 4; ++k) {
        CHECK(lab[k] == doctest::Approx(vab.vec[k]).epsilon(1e-12));
        CHECK(lba[k] == doctest::Approx(vba.vec[k]).epsilon(1e-12));
    }
}

TEST_CASE("triangle comparison defect vanishes at matching curvature") {
    // all three backends whose curvature equals the comparison bound
    for (const char* spec : {"euclidean:2", "sphere", "so3"}) {
        auto m = make_manifold(spec);
        const auto z = m->origin();
        ManifoldPoint x, y;
        if (m->kind() == ManifoldKind::euclidean) {
            x = m->make_point({0.8, 0.0});
            y = m->make_point({0.3, 0.6});
        } else if (m->kind() == ManifoldKind::sphere) {
            x = m->make_point({std::sin(0.8), 0.0, std::cos(0.8)});
            y = m->make_point({0.0, std::sin(0.5), std::cos(0.5)});
        } else {
            x = m->make_point(so3_from_axis_angle({1, 0, 0}, 0.9));
            y = m->make_point(so3_from_axis_angle({0, 1, 0.4}, 0.6));
        }
        CHECK(std::abs(m->cosine_law_defect(x, y, z)) < 1e-9);
    }

    // hyperbolic triangles are thinner than flat ones: strictly positive
    auto h = make_manifold("hyperbolic");
    const auto z = h->origin();
    const auto x = h->make_point({std::sinh(0.9), 0.0, std::cosh(0.9)});
    const auto y = h->make_point({0.0, std::sinh(0.7), std::cosh(0.7)});
    CHECK(h->cosine_law_defect(x, y, z) > 0.0);
}
