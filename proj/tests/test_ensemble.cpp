#include <doctest.h>

#include <cmath>

#include "geoflow/ensemble.hpp"
#include "geoflow/error.hpp"

using namespace geoflow;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("ensemble construction enforces the mass and distance invariants") {
    auto m = make_manifold("sphere");
    const auto north = m->make_point({0.0, 0.0, 1.0});
    const auto east = m->make_point({1.0, 0.0, 0.0});
    const auto south = m->make_point({0.0, 0.0, -1.0});

    CHECK_NOTHROW((void)make_ensemble(m, {north, east}, {0.5, 0.5}));

    // masses must be positive and sum to one
    CHECK_THROWS_AS((void)make_ensemble(m, {north, east}, {0.6, 0.6}),
                    UsageError);
    CHECK_THROWS_AS((void)make_ensemble(m, {north, east}, {1.5, -0.5}),
                    UsageError);
    CHECK_THROWS_AS((void)make_ensemble(m, {north, east}, {1.0}), UsageError);

    // antipodal pair sits at the injectivity radius: log undefined
    CHECK_THROWS_AS((void)make_ensemble(m, {north, south}, {0.5, 0.5}),
                    UsageError);

    // points must belong to the same backend
    auto flat = make_manifold("euclidean:3");
    const auto stray = flat->make_point({0.0, 0.0, 1.0});
    CHECK_THROWS_AS((void)make_ensemble(m, {north, stray}, {0.5, 0.5}),
                    UsageError);

    // coincident points are fine
    CHECK_NOTHROW((void)make_ensemble(m, {north, north}, {0.5, 0.5}));
}

TEST_CASE("uniform masses sum to one") {
    const auto w = uniform_masses(8);
    REQUIRE(w.size() == 8);
    for (double x : w) CHECK(x == doctest::Approx(0.125).epsilon(1e-16));
    const auto w3 = uniform_masses(3);
    double sum = 0.0;
    for (double x : w3) sum += x;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK_THROWS_AS((void)uniform_masses(0), UsageError);
}

TEST_CASE("weighted mean in the plane is the weighted average") {
    auto m = make_manifold("euclidean:2");
    const auto e = make_ensemble(
        m,
        {m->make_point({0.0, 0.0}), m->make_point({1.0, 0.0}),
         m->make_point({0.0, 1.0})},
        {0.5, 0.25, 0.25});
    const auto mean = frechet_mean(e);
    CHECK(mean.coords[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mean.coords[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mean of a symmetric pair lies at the midpoint") {
    auto sph = make_manifold("sphere");
    const double th = 0.7;
    const auto e = make_ensemble(
        sph,
        {sph->make_point({std::sin(th), 0.0, std::cos(th)}),
         sph->make_point({-std::sin(th), 0.0, std::cos(th)})},
        {0.5, 0.5});
    const auto mean = frechet_mean(e);
    CHECK(sph->distance(mean, sph->make_point({0.0, 0.0, 1.0})) < 1e-9);

    auto rot = make_manifold("so3");
    const auto er = make_ensemble(
        rot,
        {rot->make_point(so3_from_axis_angle({0, 0, 1}, 0.8)),
         rot->make_point(so3_from_axis_angle({0, 0, 1}, -0.8))},
        {0.5, 0.5});
    CHECK(rot->distance(frechet_mean(er), rot->origin()) < 1e-9);
}

TEST_CASE("weighted mean along one meridian interpolates the angles") {
    // both points on the x-z meridian: the mean solves the 1-d problem,
    // angle = 0.75 * 0.2 + 0.25 * 1.0 = 0.4
    auto m = make_manifold("sphere");
    const auto e = make_ensemble(
        m,
        {m->make_point({std::sin(0.2), 0.0, std::cos(0.2)}),
         m->make_point({std::sin(1.0), 0.0, std::cos(1.0)})},
        {0.75, 0.25});
    const auto mean = frechet_mean(e);
    const auto want = m->make_point({std::sin(0.4), 0.0, std::cos(0.4)});
    CHECK(m->distance(mean, want) < 1e-9);
}

TEST_CASE("ball sampling is deterministic and respects the radius") {
    auto m = make_manifold("so3");
    const auto center = m->origin();

    SamplingScheme axis;
    axis.kind = SamplingKind::so3_angle_axis;
    axis.radius = kPi / 4;

    const auto a = sample_ball(*m, center, axis, 99, 25);
    const auto b = sample_ball(*m, center, axis, 99, 25);
    REQUIRE(a.size() == 25);
    for (int i = 0; i < 25; ++i) {
        for (int k = 0; k < 4; ++k) CHECK(a[i].coords[k] == b[i].coords[k]);
        CHECK(m->distance(center, a[i]) <= kPi / 4 + 1e-12);
    }

    const auto c = sample_ball(*m, center, axis, 100, 25);
    bool same = true;
    for (int i = 0; i < 25 && same; ++i)
        for (int k = 0; k < 4; ++k)
            if (a[i].coords[k] != c[i].coords[k]) same = false;
    CHECK(!same);

    SamplingScheme tang;
    tang.kind = SamplingKind::tangent_uniform;
    tang.radius = 0.5;
    const auto d = sample_ball(*m, center, tang, 7, 30);
    for (const auto& pt : d) CHECK(m->distance(center, pt) <= 0.5 + 1e-12);

    auto sph = make_manifold("sphere");
    const auto e =
        sample_ball(*sph, sph->make_point({0.0, 0.0, 1.0}), tang, 7, 30);
    for (const auto& pt : e)
        CHECK(sph->distance(sph->make_point({0.0, 0.0, 1.0}), pt) <=
              0.5 + 1e-12);

    // angle-axis sampling is a rotation-group scheme
    CHECK_THROWS_AS(
        (void)sample_ball(*sph, sph->make_point({0.0, 0.0, 1.0}), axis, 7, 5),
        UsageError);
}

TEST_CASE("ensemble recheck catches points drifting past the horizon") {
    auto m = make_manifold("sphere");
    auto e = make_ensemble(m,
                           {m->make_point({0.0, 0.0, 1.0}),
                            m->make_point({1.0, 0.0, 0.0})},
                           {0.5, 0.5});
    CHECK_NOTHROW(check_ensemble(e));
    e.points[1].coords = {0.0, 0.0, -1.0};  // antipodal to the first
    CHECK_THROWS_AS(check_ensemble(e), UsageError);
}
