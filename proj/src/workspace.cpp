#include "hybridnav/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridnav/errors.hpp"

namespace hybridnav {

namespace {

std::string fmt_index(const char* what, int k) {
  std::ostringstream os;
  os << what << " " << k;
  return os.str();
}

// Canonical two-dimensional model of the virtual-destination pair: the
// aperture of the mode-selection cones depends only on the target distance,
// the vision half-aperture and the virtual-destination distance, not on the
// avoidance plane, so it can be derived once per obstacle.
double derive_aperture(double target_dist, double theta_d, double vd_distance,
                       double aperture_factor) {
  const Eigen::Vector2d c(target_dist, 0.0);
  const Eigen::Vector2d x1 =
      vd_distance * Eigen::Vector2d(std::cos(theta_d), std::sin(theta_d));
  const Eigen::Vector2d xm1 =
      vd_distance * Eigen::Vector2d(std::cos(theta_d), -std::sin(theta_d));
  const double psi = angle_between(c - x1, c - xm1);
  return aperture_factor * std::min(psi / 2.0, (M_PI - psi) / 2.0);
}

}  // namespace

std::vector<Vec> sample_ball_boundary(const Vec& center, double radius, int count) {
  const int n = static_cast<int>(center.size());
  std::vector<Vec> pts;
  pts.reserve(count);
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / count;
      Vec p(2);
      p << center[0] + radius * std::cos(a), center[1] + radius * std::sin(a);
      pts.push_back(std::move(p));
    }
  } else if (n == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      Vec p(3);
      p << center[0] + radius * rho * std::cos(a), center[1] + radius * rho * std::sin(a),
          center[2] + radius * z;
      pts.push_back(std::move(p));
    }
  } else {
    SplitMix64 rng(0xB0D1E500ull + static_cast<std::uint64_t>(n));
    for (int i = 0; i < count; ++i) {
      pts.push_back(center + radius * rng.unit_vector(n));
    }
  }
  return pts;
}

std::vector<std::string> Workspace::check(int dimension, const std::vector<Ball>& balls,
                                          const Vec& target,
                                          const WorkspaceParams& params) {
  std::vector<std::string> out;
  if (dimension < 2) out.push_back("dimension must be at least 2");
  if (target.size() != dimension) out.push_back("target dimension mismatch");
  for (std::size_t k = 0; k < balls.size(); ++k) {
    if (balls[k].center.size() != dimension) {
      out.push_back(fmt_index("dimension mismatch for obstacle", static_cast<int>(k)));
    }
    if (!(balls[k].radius > 0.0)) {
      out.push_back(fmt_index("non-positive radius for obstacle", static_cast<int>(k)));
    }
  }
  if (!out.empty()) return out;  // geometric checks need consistent shapes

  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      const double gap =
          (balls[i].center - balls[j].center).norm() - balls[i].radius - balls[j].radius;
      if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "obstacles " << i << " and " << j << " are not disjoint (gap " << gap << ")";
        out.push_back(os.str());
      }
    }
  }
  for (std::size_t k = 0; k < balls.size(); ++k) {
    const double d = (target - balls[k].center).norm() - balls[k].radius;
    if (!(d > 0.0)) {
      out.push_back(fmt_index("target is not strictly outside obstacle", static_cast<int>(k)));
    }
  }
  if (!(params.gamma > 0.0)) out.push_back("gamma must be positive");
  if (!(params.convergence_radius > 0.0)) out.push_back("convergence radius must be positive");
  if (!(params.sensor_range > 0.0)) out.push_back("sensor range must be positive");
  auto factor_ok = [](double f) { return f > 0.0 && f < 1.0; };
  if (!factor_ok(params.active_range_factor)) out.push_back("active_range_factor outside (0,1)");
  if (!factor_ok(params.vd_distance_factor)) out.push_back("vd_distance_factor outside (0,1)");
  if (!factor_ok(params.aperture_factor)) out.push_back("aperture_factor outside (0,1)");
  if (!out.empty()) return out;

  // Blend width must not exceed the smallest active range; derive them the
  // same way `build` will.
  if (params.blend_width > 0.0 && !balls.empty()) {
    Workspace tmp = build(dimension, balls, target, params, /*strict=*/false);
    double min_range = std::numeric_limits<double>::infinity();
    for (const auto& ob : tmp.obstacles_) min_range = std::min(min_range, ob.active_range);
    if (params.blend_width > min_range + 1e-12) {
      std::ostringstream os;
      os << "blend width " << params.blend_width << " exceeds smallest active range "
         << min_range;
      out.push_back(os.str());
    }
  } else if (params.blend_width < 0.0) {
    out.push_back("blend width must be positive (or zero to use the default)");
  }
  return out;
}

Workspace Workspace::build(int dimension, std::vector<Ball> balls, Vec target,
                           WorkspaceParams params, bool strict) {
  Workspace ws;
  ws.dimension_ = dimension;
  ws.target_ = std::move(target);
  ws.params_ = params;
  ws.obstacles_.reserve(balls.size());
  for (auto& b : balls) {
    Obstacle ob;
    ob.center = std::move(b.center);
    ob.radius = b.radius;
    ws.obstacles_.push_back(std::move(ob));
  }

  for (int k = 0; k < ws.size(); ++k) {
    Obstacle& ob = ws.obstacles_[k];
    const double d = (ws.target_ - ob.center).norm();
    double rhat = ws.r_hat(k, ws.target_);
    if (!strict) rhat = std::max(rhat, 1e-6);
    ob.active_range =
        params.active_range_factor * std::min({rhat, params.sensor_range, ob.radius});
    const double theta_d = std::asin(std::min(1.0, ob.radius / d));
    const double junction = d * std::cos(theta_d);
    const double halfspace_bound = (d - ob.radius) / std::cos(theta_d);
    ob.vd_distance = params.vd_distance_factor * std::min(junction, halfspace_bound);
    ob.aperture = derive_aperture(d, theta_d, ob.vd_distance, params.aperture_factor);

    // Shell width for regions anchored at virtual destinations.  It must
    // exceed the target shell (so the mode cannot flip back to avoidance the
    // instant the state crosses the bottom boundary of the target region) and
    // should cover the whole maneuver, whose far corner sits one chord away
    // from the virtual destination.  Both candidates stay below the clearance
    // bound rhat and the sensing radius whenever those are finite.
    const double chord = std::sqrt(std::max(
        0.0, d * d + ob.vd_distance * ob.vd_distance -
                 2.0 * d * ob.vd_distance * std::cos(theta_d)));
    double vd_range = std::max(2.0 * ob.active_range, chord - ob.radius);
    const double cap = 0.9 * std::min(rhat, params.sensor_range);
    if (std::isfinite(cap)) vd_range = std::min(vd_range, cap);
    ob.vd_active_range = std::max(vd_range, std::nextafter(ob.active_range, INFINITY));
  }

  if (params.blend_width > 0.0) {
    ws.blend_width_ = params.blend_width;
  } else {
    double min_range = std::numeric_limits<double>::infinity();
    for (const auto& ob : ws.obstacles_) min_range = std::min(min_range, ob.active_range);
    ws.blend_width_ = ws.obstacles_.empty() ? 1.0 : 0.5 * min_range;
  }
  ws.params_.blend_width = ws.blend_width_;
  return ws;
}

Workspace Workspace::create(int dimension, std::vector<Ball> balls, Vec target,
                            WorkspaceParams params) {
  auto violations = check(dimension, balls, target, params);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return build(dimension, std::move(balls), std::move(target), params, /*strict=*/true);
}

Workspace Workspace::from_sensor(int dimension, std::vector<Ball> balls, Vec target,
                                 WorkspaceParams params) {
  return build(dimension, std::move(balls), std::move(target), params, /*strict=*/false);
}

double Workspace::obstacle_distance(const Vec& q, int k) const {
  const Obstacle& ob = obstacles_.at(k);
  return (q - ob.center).norm() - ob.radius;
}

double Workspace::clearance(const Vec& q) const {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) best = std::min(best, obstacle_distance(q, k));
  return best;
}

bool Workspace::in_free_space(const Vec& q) const {
  for (int k = 0; k < size(); ++k) {
    if (obstacle_distance(q, k) < -kSetTol) return false;
  }
  return true;
}

double Workspace::theta(const Vec& q, int k) const {
  const Obstacle& ob = obstacles_.at(k);
  const double d = (q - ob.center).norm();
  if (d < ob.radius - kSetTol) {
    throw std::domain_error("theta: point strictly inside the obstacle");
  }
  return std::asin(std::min(1.0, ob.radius / d));
}

bool Workspace::in_shadow(const Vec& q, int k, const Vec& dest) const {
  const Obstacle& ob = obstacles_.at(k);
  const ConeSpec cone(dest, ob.center - dest, theta(dest, k));
  return in_cone(q, cone, Rel::Le) && compare((ob.center - q).dot(dest - q), Rel::Ge, 0.0) &&
         in_free_space(q);
}

bool Workspace::in_active_region(const Vec& q, int k, const Vec& dest, double shell) const {
  const Obstacle& ob = obstacles_.at(k);
  const double s = shell > 0.0 ? shell : ob.active_range;
  return in_shadow(q, k, dest) && compare((q - ob.center).norm(), Rel::Le, ob.radius + s);
}

bool Workspace::in_active_interior(const Vec& q, int k, const Vec& dest, double shell) const {
  const Obstacle& ob = obstacles_.at(k);
  const double s = shell > 0.0 ? shell : ob.active_range;
  const ConeSpec cone(dest, ob.center - dest, theta(dest, k));
  return in_cone(q, cone, Rel::Lt) && compare((ob.center - q).dot(dest - q), Rel::Gt, 0.0) &&
         compare((q - ob.center).norm(), Rel::Lt, ob.radius + s) && in_free_space(q);
}

bool Workspace::in_active_core(const Vec& q, int k, const Vec& dest, double shell,
                               double tol) const {
  const Obstacle& ob = obstacles_.at(k);
  const double s = shell > 0.0 ? shell : ob.active_range;
  const ConeSpec cone(dest, ob.center - dest, theta(dest, k));
  return in_cone(q, cone, Rel::Le, tol) &&
         compare((ob.center - q).dot(dest - q), Rel::Ge, 0.0, tol) &&
         compare((q - ob.center).norm(), Rel::Le, ob.radius + s, tol);
}

bool Workspace::in_active_core_interior(const Vec& q, int k, const Vec& dest, double shell,
                                        double tol) const {
  const Obstacle& ob = obstacles_.at(k);
  const double s = shell > 0.0 ? shell : ob.active_range;
  const ConeSpec cone(dest, ob.center - dest, theta(dest, k));
  return in_cone(q, cone, Rel::Lt, tol) &&
         compare((ob.center - q).dot(dest - q), Rel::Gt, 0.0, tol) &&
         compare((q - ob.center).norm(), Rel::Lt, ob.radius + s, tol);
}

bool Workspace::on_cone_surface(const Vec& q, int k, const Vec& dest) const {
  const Obstacle& ob = obstacles_.at(k);
  const ConeSpec cone(dest, ob.center - dest, theta(dest, k));
  return in_cone(q, cone, Rel::Eq) && in_free_space(q);
}

bool Workspace::in_exit_set(const Vec& q, int k, const Vec& dest) const {
  return on_cone_surface(q, k, dest) && in_active_region(q, k, dest);
}

bool Workspace::in_hat(const Vec& q, int k, const Vec& dest) const {
  return on_cone_surface(q, k, dest) && !in_active_region(q, k, dest);
}

bool Workspace::in_active_free_space(const Vec& q) const {
  for (int k = 0; k < size(); ++k) {
    if (in_active_region(q, k, target_)) return true;
  }
  return false;
}

std::vector<int> Workspace::hidden_obstacles(int k, const Vec& dest,
                                             int samples_per_obstacle) const {
  std::vector<int> out;
  const Obstacle& ok = obstacles_.at(k);
  const Vec axis = ok.center - dest;
  const double theta_k = theta(dest, k);
  for (int j = 0; j < size(); ++j) {
    if (j == k) continue;
    const Obstacle& oj = obstacles_[j];
    const double dj = (oj.center - dest).norm();
    if (dj > oj.radius) {
      // If the whole ball misses the enclosing cone, its boundary cannot
      // meet the shadow.
      const double alpha = angle_between(axis, oj.center - dest);
      const double delta = std::asin(std::min(1.0, oj.radius / dj));
      if (alpha - delta > theta_k + 1e-6) continue;
    }
    for (const Vec& p : sample_ball_boundary(oj.center, oj.radius, samples_per_obstacle)) {
      if (in_shadow(p, k, dest)) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

double Workspace::r_hat(int k, const Vec& dest, int samples_per_obstacle) const {
  const Obstacle& ok = obstacles_.at(k);
  double best = std::numeric_limits<double>::infinity();
  for (int j : hidden_obstacles(k, dest, samples_per_obstacle)) {
    const Obstacle& oj = obstacles_[j];
    best = std::min(best, (ok.center - oj.center).norm() - ok.radius - oj.radius);
  }
  return best;
}

Vec sample_free_point(const Workspace& ws, SplitMix64& rng, double margin, double pad) {
  const int n = ws.dimension();
  Vec lo = ws.target();
  Vec hi = ws.target();
  for (const auto& ob : ws.obstacles()) {
    lo = lo.cwiseMin(ob.center - Vec::Constant(n, ob.radius));
    hi = hi.cwiseMax(ob.center + Vec::Constant(n, ob.radius));
  }
  lo -= Vec::Constant(n, pad);
  hi += Vec::Constant(n, pad);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = rng.uniform(lo[i], hi[i]);
    if (ws.clearance(q) >= margin) return q;
  }
  throw std::runtime_error("sample_free_point: rejection sampling failed");
}

}  // namespace hybridnav
