#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridnav/geometry.hpp"
#include "hybridnav/rng.hpp"

using namespace hybridnav;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

// Brute-force distance to a segment by dense sampling of the parameter.
double segment_distance_oracle(const Vec& q, const Vec& a, const Vec& b) {
  double best = std::numeric_limits<double>::infinity();
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double lam = static_cast<double>(i) / n;
    best = std::min(best, (q - (a + lam * (b - a))).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("compare widens non-strict and narrows strict relations") {
  CHECK(compare(1.0, Rel::Le, 1.0));
  CHECK(compare(1.0 + 0.5e-9, Rel::Le, 1.0));
  CHECK_FALSE(compare(1.0 + 2e-9, Rel::Le, 1.0));
  CHECK_FALSE(compare(1.0 - 0.5e-9, Rel::Lt, 1.0));
  CHECK(compare(1.0 - 2e-9, Rel::Lt, 1.0));
  CHECK(compare(1.0, Rel::Eq, 1.0 + 0.5e-9));
  // For any pair exactly one of Lt, Eq, Gt holds.
  for (double d : {-3e-9, -1e-9, 0.0, 1e-9, 3e-9}) {
    const int hits = compare(1.0 + d, Rel::Lt, 1.0) + compare(1.0 + d, Rel::Eq, 1.0) +
                     compare(1.0 + d, Rel::Gt, 1.0);
    CHECK(hits == 1);
  }
}

TEST_CASE("angle_between matches planar construction") {
  CHECK(angle_between(v2(1, 0), v2(0, 2)) == doctest::Approx(M_PI / 2));
  CHECK(angle_between(v2(1, 0), v2(-3, 0)) == doctest::Approx(M_PI));
  CHECK(angle_between(v3(1, 1, 0), v3(1, 1, 0)) == doctest::Approx(0.0));
  const double a = 0.7;
  CHECK(angle_between(v2(1, 0), v2(std::cos(a), std::sin(a))) == doctest::Approx(a));
  CHECK_THROWS_AS(angle_between(v2(0, 0), v2(1, 0)), std::domain_error);
}

TEST_CASE("reflect is an isometric involution about the mirror hyperplane") {
  SplitMix64 rng(41);
  for (int it = 0; it < 50; ++it) {
    const Vec v = rng.unit_vector(3);
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-2, 2);
    const Vec r = reflect(v, x);
    CHECK((reflect(v, r) - x).norm() < 1e-12);              // involution
    CHECK(r.norm() == doctest::Approx(x.norm()));           // isometry
    CHECK(v.dot(r) == doctest::Approx(-v.dot(x)));          // normal flips
    CHECK(((r - v.dot(r) * v) - (x - v.dot(x) * v)).norm() < 1e-12);  // tangent fixed
  }
  CHECK_THROWS_AS(reflect(v2(2, 0), v2(1, 1)), std::domain_error);
}

TEST_CASE("cone membership agrees with the angle construction") {
  const ConeSpec cone(v2(1, 1), v2(2, 0), 0.5);
  SplitMix64 rng(7);
  for (int it = 0; it < 400; ++it) {
    const double ang = rng.uniform(0, M_PI);
    if (std::abs(ang - cone.aperture) < 1e-6) continue;  // stay off the surface
    const double rad = rng.uniform(0.1, 5.0);
    const Vec q = cone.vertex + rad * v2(std::cos(ang), std::sin(ang));
    const bool inside = ang < cone.aperture;
    CHECK(in_cone(q, cone, Rel::Le) == inside);
    CHECK(in_cone(q, cone, Rel::Lt) == inside);
    CHECK(in_cone(q, cone, Rel::Ge) == !inside);
  }
  // The vertex belongs to the closed cone and the surface, not the interior.
  CHECK(in_cone(cone.vertex, cone, Rel::Le));
  CHECK(in_cone(cone.vertex, cone, Rel::Eq));
  CHECK_FALSE(in_cone(cone.vertex, cone, Rel::Lt));
  // Points exactly on the lateral surface satisfy Eq.
  const Vec s = cone.vertex + 2.0 * v2(std::cos(0.5), std::sin(0.5));
  CHECK(in_cone(s, cone, Rel::Eq));
  CHECK_THROWS_AS(ConeSpec(v2(0, 0), v2(0, 0), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(ConeSpec(v2(0, 0), v2(1, 0), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(ConeSpec(v2(0, 0), v2(1, 0), 0.0), std::invalid_argument);
}

TEST_CASE("halfspace membership") {
  const HalfSpaceSpec h(v2(1, 0), v2(0, 2), Rel::Ge);
  CHECK(in_halfspace(v2(5, 1), h));
  CHECK(in_halfspace(v2(5, 0), h));
  CHECK_FALSE(in_halfspace(v2(5, -1), h));
  CHECK_THROWS_AS(HalfSpaceSpec(v2(0, 0), v2(0, 0), Rel::Ge), std::invalid_argument);
}

TEST_CASE("parallel set picks directions at the cone angle") {
  const Vec axis = v3(0, 0, 3);
  const double phi = 0.8;
  const Vec on = v3(std::sin(phi), 0, std::cos(phi));
  const Vec off = v3(std::sin(phi + 0.01), 0, std::cos(phi + 0.01));
  CHECK(in_parallel_set(on, axis, phi));
  CHECK(in_parallel_set(2.5 * on, axis, phi));  // scale invariant
  CHECK_FALSE(in_parallel_set(off, axis, phi));
  CHECK(in_parallel_set(Vec::Zero(3), axis, phi));  // zero vector convention
}

TEST_CASE("segment distance matches dense-sampling oracle") {
  SplitMix64 rng(99);
  for (int it = 0; it < 60; ++it) {
    const int n = 2 + (it % 3);
    Vec a(n), b(n), q(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
      q[i] = rng.uniform(-4, 4);
    }
    const double got = segment_distance(q, a, b);
    const double want = segment_distance_oracle(q, a, b);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
  // Degenerate segment falls back to point distance.
  CHECK(segment_distance(v2(3, 4), v2(0, 0), v2(0, 0)) == doctest::Approx(5.0));
}

TEST_CASE("segment-ball intersection counts tangency as a hit") {
  CHECK(segment_hits_ball(v2(-2, 1), v2(2, 1), v2(0, 0), 1.0));       // tangent
  CHECK(segment_hits_ball(v2(-2, 0), v2(2, 0), v2(0, 0), 1.0));      // through
  CHECK_FALSE(segment_hits_ball(v2(-2, 1.01), v2(2, 1.01), v2(0, 0), 1.0));
  CHECK_FALSE(segment_hits_ball(v2(2, 0), v2(3, 0), v2(0, 0), 1.0));  // short
  CHECK_THROWS_AS(segment_hits_ball(v2(0, 0), v2(1, 0), v2(5, 5), 0.0),
                  std::invalid_argument);
}

TEST_CASE("line distance") {
  CHECK(line_distance(v2(0, 3), v2(-1, 0), v2(5, 0)) == doctest::Approx(3.0));
  CHECK(line_distance(v2(10, 3), v2(-1, 0), v2(5, 0)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(line_distance(v2(0, 0), v2(1, 1), v2(1, 1)), std::domain_error);
}

TEST_CASE("plane span projects onto the affine plane") {
  const PlaneSpan p(v3(0, 0, 1), v3(1, 0, 0), v3(1, 1, 0));
  CHECK(std::abs(p.e1().dot(p.e2())) < 1e-12);
  CHECK(p.e1().norm() == doctest::Approx(1.0));
  CHECK(p.e2().norm() == doctest::Approx(1.0));
  CHECK(p.distance(v3(3, -2, 1)) == doctest::Approx(0.0));
  CHECK(p.distance(v3(3, -2, 4)) == doctest::Approx(3.0));
  const Vec pr = p.project(v3(3, -2, 4));
  CHECK(pr[2] == doctest::Approx(1.0));
  CHECK((p.project(pr) - pr).norm() < 1e-12);  // idempotent
  CHECK_THROWS_AS(PlaneSpan(v3(0, 0, 0), v3(1, 0, 0), v3(-2, 0, 0)), std::domain_error);
  const PlaneSpan q = PlaneSpan::through(v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0));
  CHECK(q.distance(v3(0.3, -0.4, 0)) == doctest::Approx(0.0));
}
