#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridnav/controller.hpp"
#include "hybridnav/errors.hpp"
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

Workspace canonical2d() {
  return Workspace::create(2, {{v2(1, 0), 0.8}}, v2(4, 0), WorkspaceParams{});
}

Workspace canonical3d() {
  return Workspace::create(3, {{v3(1, 0, 0), 0.8}}, v3(4, 0, 0), WorkspaceParams{});
}

// Rejection-samples a state in the avoidance flow set of (k, m).
Vec sample_flow_state(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                      SplitMix64& rng, double lo = -4, double hi = 8) {
  for (int it = 0; it < 200000; ++it) {
    Vec q(ws.dimension());
    for (int i = 0; i < q.size(); ++i) q[i] = rng.uniform(lo, hi);
    if (in_flow_avoidance(ws, vd, m, q)) return q;
  }
  throw std::runtime_error("no flow state found");
}

// Best cone-parallel direction by dense sweep: directions making angle
// theta with the obstacle direction, maximizing alignment with the pull.
Vec brute_force_direction(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                          const Vec& x, int samples) {
  const Obstacle& ob = ws.obstacle(vd.k);
  const Vec axis = (ob.center - x).normalized();
  const double theta = ws.theta(x, vd.k);
  const Vec pull = vd.dest(m) - x;
  // Orthonormal completion of the axis.
  std::vector<Vec> basis;
  for (int i = 0; i < x.size(); ++i) {
    Vec e = Vec::Unit(x.size(), i);
    for (const auto& b : basis) e -= e.dot(b) * b;
    e -= e.dot(axis) * axis;
    if (e.norm() > 1e-8) basis.push_back(e.normalized());
  }
  Vec best;
  double best_dot = -std::numeric_limits<double>::infinity();
  if (x.size() == 2) {
    for (int s : {-1, 1}) {
      const Vec w = std::cos(theta) * axis + s * std::sin(theta) * basis[0];
      if (w.dot(pull) > best_dot) {
        best_dot = w.dot(pull);
        best = w;
      }
    }
    return best;
  }
  for (int i = 0; i < samples; ++i) {
    const double phi = 2.0 * M_PI * i / samples;
    Vec lateral = std::cos(phi) * basis[0] + std::sin(phi) * basis[1];
    for (std::size_t b = 2; b < basis.size(); ++b) lateral += 0.0 * basis[b];
    const Vec w = std::cos(theta) * axis + std::sin(theta) * lateral;
    if (w.dot(pull) > best_dot) {
      best_dot = w.dot(pull);
      best = w;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("nominal control is the scaled target error") {
  const Workspace ws = canonical2d();
  const Vec u = nominal_control(ws, v2(0, 1));
  CHECK(u[0] == doctest::Approx(ws.gamma() * 4.0));
  CHECK(u[1] == doctest::Approx(-ws.gamma()));
}

TEST_CASE("virtual destinations sit symmetrically on the hat") {
  const Workspace ws = canonical2d();
  const auto vd = select_virtual_destinations(ws, 0, v2(-2, 0.3));
  const Vec xd = ws.target();
  CHECK((vd.x_plus - xd).norm() == doctest::Approx(ws.obstacle(0).vd_distance));
  CHECK((vd.x_minus - xd).norm() == doctest::Approx(ws.obstacle(0).vd_distance));
  CHECK(ws.in_hat(vd.x_plus, 0, xd));
  CHECK(ws.in_hat(vd.x_minus, 0, xd));
  // Mirror symmetry about the target-center axis.
  const Vec axis = (ws.obstacle(0).center - xd).normalized();
  const Vec mid = 0.5 * (vd.x_plus + vd.x_minus) - xd;
  CHECK((mid - mid.dot(axis) * axis).norm() < 1e-9);
  // Both lie in the maneuver plane, as do the target and the center.
  CHECK(vd.plane.distance(vd.x_plus) < 1e-9);
  CHECK(vd.plane.distance(vd.x_minus) < 1e-9);
  CHECK(vd.plane.distance(xd) < 1e-9);
  CHECK(vd.plane.distance(ws.obstacle(0).center) < 1e-9);
  CHECK(vd.aperture > 0.0);
  CHECK(vd.aperture < M_PI / 2);
}

TEST_CASE("entry on the axis falls back to a seeded plane") {
  const Workspace ws = canonical3d();
  const auto vd = select_virtual_destinations(ws, 0, v3(-2, 0, 0));
  CHECK((vd.x_plus - vd.x_minus).norm() > 1e-6);
  CHECK(vd.plane.distance(ws.target()) < 1e-9);
}

TEST_CASE("oversized virtual-destination distance is rejected") {
  const Workspace ws = canonical2d();
  CHECK_THROWS_AS(select_virtual_destinations(ws, 0, v2(-2, 0.3), 50.0),
                  ParameterError);
}

TEST_CASE("avoidance direction matches the optimality oracle") {
  SplitMix64 rng(2024);
  for (int dim : {2, 3}) {
    const Workspace ws = dim == 2 ? canonical2d() : canonical3d();
    Vec entry = Vec::Zero(dim);
    entry[0] = -2;
    entry[1] = 0.3;
    const auto vd = select_virtual_destinations(ws, 0, entry);
    for (Mode m : {Mode::AvoidPlus, Mode::AvoidMinus}) {
      for (int it = 0; it < 25; ++it) {
        const Vec x = sample_flow_state(ws, vd, m, rng);
        const Vec k = kappa(ws, vd, m, x);
        const Vec w = brute_force_direction(ws, vd, m, x, 20000);
        // Within the sweep's angular resolution (2*pi/20000 < 0.5 deg).
        CHECK(angle_between(k, w) < 0.5 * M_PI / 180.0);
        // Exact angle identity: kappa tilts the pull direction onto the
        // vision cone.
        const double theta = ws.theta(x, 0);
        const double beta = beta_angle(ws, vd, m, x);
        if (beta > 1e-6 && theta - beta > 1e-6) {
          CHECK(std::abs(angle_between(vd.dest(m) - x, k) - (theta - beta)) < 1e-9);
        }
        // kappa is never longer than the pull it modifies.
        CHECK(k.dot(vd.dest(m) - x) > 0.0);
      }
    }
  }
}

TEST_CASE("avoidance control equals the nominal control on the common generator") {
  // On the tangent line through target, virtual destination and tangency
  // point the two fields agree exactly; the exit jump is continuous there.
  const Workspace ws = canonical2d();
  const Vec xd = ws.target();
  const Vec c = ws.obstacle(0).center;
  const double r = ws.obstacle(0).radius;
  const auto vd = select_virtual_destinations(ws, 0, v2(-2, 0.3));
  const double d = (xd - c).norm();
  const double ca = r / d;
  const Vec t1 = c + r * v2(ca, std::sqrt(1 - ca * ca));
  // t1 lies on the line from the target through x_plus.
  CHECK(line_distance(t1, xd, vd.x_plus) < 1e-9);
  const Vec u_avoid = mu(ws, vd, Mode::AvoidPlus, t1) *
                      kappa(ws, vd, Mode::AvoidPlus, t1);
  const Vec u_nom = nominal_control(ws, t1);
  CHECK((u_avoid - u_nom).norm() < 1e-9 * ws.gamma() * (1.0 + (t1 - xd).norm()));
}

TEST_CASE("proximity blend is piecewise linear in the clearance") {
  const Workspace ws = canonical2d();
  const Obstacle& ob = ws.obstacle(0);
  const double range = ob.active_range;
  const double eps = ws.blend_width();
  auto at_clearance = [&](double cl) {
    return alpha(ws, 0, ob.center + (ob.radius + cl) * v2(0, 1));
  };
  CHECK(at_clearance(0.5 * (range - eps)) == doctest::Approx(1.0));
  CHECK(at_clearance(range - eps) == doctest::Approx(1.0));
  CHECK(at_clearance(range - 0.5 * eps) == doctest::Approx(0.5));
  CHECK(at_clearance(range) == doctest::Approx(0.0));
  CHECK(at_clearance(range + 0.1) == doctest::Approx(0.0));
}

TEST_CASE("mode zero control ignores the obstacle") {
  const Workspace ws = canonical2d();
  SplitMix64 rng(5);
  for (int it = 0; it < 50; ++it) {
    const Vec x = sample_free_point(ws, rng);
    const Vec u = control(ws, nullptr, 0, Mode::ToDestination, x);
    CHECK((u - nominal_control(ws, x)).norm() < 1e-15);
  }
}

TEST_CASE("selection regions partition and overlap resolves deterministically") {
  const Workspace ws = canonical2d();
  const auto vd = select_virtual_destinations(ws, 0, v2(-2, 0.3));
  SplitMix64 rng(11);
  int plus = 0, minus = 0, overlap = 0;
  for (int it = 0; it < 2000; ++it) {
    const Vec x = sample_free_point(ws, rng);
    if (!in_jump_to_avoidance_k(ws, 0, x)) continue;
    const bool sp = in_selection_region(ws, vd, Mode::AvoidPlus, x);
    const bool sm = in_selection_region(ws, vd, Mode::AvoidMinus, x);
    const bool ov = in_selection_overlap(ws, vd, x);
    // The one-sided regions and the overlap tile the activation set: the
    // cone apertures are strictly below half the angle between the rays, so
    // no state is inside both equilibrium cones at once.
    CHECK(int(sp) + int(sm) + int(ov) == 1);
    if (ov) {
      ++overlap;
      // The original selector defaults to +1 on the overlap; the splitting
      // selector picks the nearest virtual destination.
      CHECK(select_mode(ws, vd, x) == Mode::AvoidPlus);
      const Mode mc = select_mode_closest(ws, vd, x);
      const double dp = (x - vd.x_plus).norm();
      const double dm = (x - vd.x_minus).norm();
      if (std::abs(dp - dm) > 1e-9) {
        CHECK(mc == (dp < dm ? Mode::AvoidPlus : Mode::AvoidMinus));
      }
    } else if (sp) {
      CHECK(select_mode(ws, vd, x) == Mode::AvoidPlus);
      CHECK(select_mode_closest(ws, vd, x) == Mode::AvoidPlus);
      ++plus;
    } else {
      CHECK(select_mode(ws, vd, x) == Mode::AvoidMinus);
      CHECK(select_mode_closest(ws, vd, x) == Mode::AvoidMinus);
      ++minus;
    }
  }
  CHECK(plus > 0);
  CHECK(minus > 0);
  CHECK(overlap > 0);
}

TEST_CASE("flow and jump sets cover free space for every mode") {
  const Workspace ws = canonical2d();
  const auto vd = select_virtual_destinations(ws, 0, v2(-2, 0.3));
  SplitMix64 rng(21);
  for (int it = 0; it < 5000; ++it) {
    const Vec x = sample_free_point(ws, rng);
    CHECK((in_flow_to_destination(ws, x) || in_jump_to_avoidance(ws, x)));
    for (Mode m : {Mode::AvoidPlus, Mode::AvoidMinus}) {
      CHECK((in_flow_avoidance(ws, vd, m, x) || in_jump_avoidance(ws, vd, m, x)));
    }
  }
}

TEST_CASE("initial obstacle prefers the blocking ball") {
  WorkspaceParams p;
  const Workspace ws =
      Workspace::create(2, {{v2(0, 2), 0.5}, {v2(2, 0), 0.5}}, v2(4, 0), p);
  // Obstacle 1 blocks the sight line from the origin even though obstacle 0
  // is at the same distance.
  CHECK(initial_obstacle(ws, v2(0, 0)) == 1);
  // Nothing blocks from high above: fall back to the nearest.
  CHECK(initial_obstacle(ws, v2(0, 6)) == 0);
}

TEST_CASE("nearest boundary point is on the target side") {
  const Workspace ws = canonical2d();
  const Vec p = nearest_boundary_point(ws, 0);
  CHECK(p[0] == doctest::Approx(1.8));
  CHECK(p[1] == doctest::Approx(0.0));
}
