#include "hybridnav/controller.hpp"

#include <cmath>

#include "hybridnav/errors.hpp"

namespace hybridnav {

namespace {

// Vision half-aperture that saturates at pi/2 on and inside the obstacle
// boundary, so control evaluation tolerates integrator stage points that
// graze the surface.
double theta_saturated(const Workspace& ws, int k, const Vec& x) {
  const Obstacle& ob = ws.obstacle(k);
  const double d = (x - ob.center).norm();
  if (d <= ob.radius) return M_PI / 2.0;
  return std::asin(ob.radius / d);
}

}  // namespace

Vec nominal_control(const Workspace& ws, const Vec& x) {
  return -ws.gamma() * (x - ws.target());
}

VirtualDestinations select_virtual_destinations(const Workspace& ws, int k,
                                                const Vec& entry, double distance) {
  const Obstacle& ob = ws.obstacle(k);
  const Vec& xd = ws.target();
  const Vec axis = ob.center - xd;
  const double d = axis.norm();
  const Vec a_hat = axis / d;
  const double theta_d = ws.theta(xd, k);
  const double e = distance > 0.0 ? distance : ob.vd_distance;

  // Plane seed: the entry point unless it is on the target-center line, in
  // which case the canonical basis direction least aligned with the axis.
  Vec seed = entry - xd;
  Vec perp = seed - seed.dot(a_hat) * a_hat;
  if (perp.norm() <= 1e-9) {
    int best = 0;
    for (int i = 1; i < ws.dimension(); ++i) {
      if (std::abs(a_hat[i]) < std::abs(a_hat[best])) best = i;
    }
    seed = Vec::Unit(ws.dimension(), best);
    perp = seed - seed.dot(a_hat) * a_hat;
  }
  const Vec n_hat = perp.normalized();

  VirtualDestinations vd{k,
                         xd + e * (std::cos(theta_d) * a_hat + std::sin(theta_d) * n_hat),
                         Vec(),
                         e,
                         0.0,
                         PlaneSpan(xd, a_hat, n_hat)};
  vd.x_minus = xd - reflect(a_hat, vd.x_plus - xd);

  const Vec p = nearest_boundary_point(ws, k);
  if (!compare((xd - p).dot(vd.x_plus - p), Rel::Ge, 0.0)) {
    throw ParameterError("virtual destination violates the half-space constraint");
  }
  if (!ws.in_hat(vd.x_plus, k, xd) || !ws.in_hat(vd.x_minus, k, xd)) {
    throw ParameterError("virtual destination is not on the cone hat");
  }

  const double psi = angle_between(ob.center - vd.x_plus, ob.center - vd.x_minus);
  if (psi <= 1e-9 || psi >= M_PI - 1e-9) {
    throw ParameterError("virtual destinations subtend a degenerate angle");
  }
  vd.aperture = ws.params().aperture_factor * std::min(psi / 2.0, (M_PI - psi) / 2.0);
  return vd;
}

double beta_angle(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                  const Vec& x) {
  const Obstacle& ob = ws.obstacle(vd.k);
  return angle_between(ob.center - x, vd.dest(m) - x);
}

Vec kappa_bar(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x) {
  return ws.gamma() * (vd.dest(m) - x);
}

Vec kappa(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x) {
  const Obstacle& ob = ws.obstacle(vd.k);
  const Vec kb = kappa_bar(ws, vd, m, x);
  const double theta = theta_saturated(ws, vd.k, x);
  const double beta = angle_between(ob.center - x, kb);
  const double tau = kb.norm() * std::sin(theta - beta) / std::sin(theta);
  return kb - tau * (ob.center - x).normalized();
}

double mu(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x) {
  const Obstacle& ob = ws.obstacle(vd.k);
  const double theta = theta_saturated(ws, vd.k, x);
  const double beta = angle_between(ob.center - x, vd.dest(m) - x);
  return 1.0 + (vd.distance / (x - vd.dest(m)).norm()) * (beta / theta);
}

double alpha(const Workspace& ws, int k, const Vec& x) {
  const double d = ws.obstacle_distance(x, k);
  const double range = ws.obstacle(k).active_range;
  const double eps = ws.blend_width();
  if (d < range - eps) return 1.0;
  if (d <= range) return (range - d) / eps;
  return 0.0;
}

Vec control(const Workspace& ws, const VirtualDestinations* vd, int k, Mode m,
            const Vec& x) {
  if (!is_avoidance(m)) return nominal_control(ws, x);
  if (vd == nullptr || vd->k != k) {
    throw std::invalid_argument("control: avoidance mode without virtual destinations");
  }
  const double a = alpha(ws, k, x);
  const Vec ud = nominal_control(ws, x);
  if (a == 0.0) return ud;
  if ((x - vd->dest(m)).norm() < 1e-15) return ud;  // measure-zero singularity
  return a * mu(ws, *vd, m, x) * kappa(ws, *vd, m, x) + (1.0 - a) * ud;
}

bool in_flow_to_destination_k(const Workspace& ws, int k, const Vec& x) {
  return ws.in_free_space(x) && !ws.in_active_interior(x, k, ws.target());
}

bool in_flow_to_destination(const Workspace& ws, const Vec& x) {
  if (!ws.in_free_space(x)) return false;
  for (int k = 0; k < ws.size(); ++k) {
    if (ws.in_active_interior(x, k, ws.target())) return false;
  }
  return true;
}

bool in_jump_to_avoidance_k(const Workspace& ws, int k, const Vec& x) {
  return ws.in_active_region(x, k, ws.target());
}

bool in_jump_to_avoidance(const Workspace& ws, const Vec& x) {
  return ws.in_active_free_space(x);
}

namespace {

ConeSpec equilibrium_cone(const Workspace& ws, const VirtualDestinations& vd, Mode m) {
  const Obstacle& ob = ws.obstacle(vd.k);
  return ConeSpec(ob.center, ob.center - vd.dest(m), vd.aperture);
}

}  // namespace

bool in_flow_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                       const Vec& x) {
  return ws.in_active_region(x, vd.k, vd.dest(m), ws.obstacle(vd.k).vd_active_range) &&
         in_cone(x, equilibrium_cone(ws, vd, m), Rel::Ge);
}

bool in_flow_avoidance_interior(const Workspace& ws, const VirtualDestinations& vd,
                                Mode m, const Vec& x) {
  return ws.in_active_interior(x, vd.k, vd.dest(m), ws.obstacle(vd.k).vd_active_range) &&
         in_cone(x, equilibrium_cone(ws, vd, m), Rel::Gt);
}

bool in_jump_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                       const Vec& x) {
  return ws.in_free_space(x) && !in_flow_avoidance_interior(ws, vd, m, x);
}

bool flow_core_to_destination(const Workspace& ws, const Vec& x, double tol) {
  for (int k = 0; k < ws.size(); ++k) {
    if (ws.in_active_core_interior(x, k, ws.target(), -1.0, tol)) return false;
  }
  return true;
}

bool flow_core_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                         const Vec& x, double tol) {
  return ws.in_active_core(x, vd.k, vd.dest(m), ws.obstacle(vd.k).vd_active_range, tol) &&
         in_cone(x, equilibrium_cone(ws, vd, m), Rel::Ge, tol);
}

bool in_selection_region(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                         const Vec& x) {
  const Obstacle& ob = ws.obstacle(vd.k);
  const ConeSpec plus(ob.center, ob.center - vd.x_plus, vd.aperture);
  const ConeSpec minus(ob.center, ob.center - vd.x_minus, vd.aperture);
  const bool out_plus = in_cone(x, plus, Rel::Ge);
  const bool out_minus = in_cone(x, minus, Rel::Ge);
  if (m == Mode::AvoidPlus) return out_plus && !out_minus;
  if (m == Mode::AvoidMinus) return out_minus && !out_plus;
  throw std::invalid_argument("in_selection_region: mode must be +-1");
}

bool in_selection_overlap(const Workspace& ws, const VirtualDestinations& vd,
                          const Vec& x) {
  const Obstacle& ob = ws.obstacle(vd.k);
  const ConeSpec plus(ob.center, ob.center - vd.x_plus, vd.aperture);
  const ConeSpec minus(ob.center, ob.center - vd.x_minus, vd.aperture);
  return in_cone(x, plus, Rel::Ge) && in_cone(x, minus, Rel::Ge);
}

Mode select_mode(const Workspace& ws, const VirtualDestinations& vd, const Vec& x) {
  if (in_selection_region(ws, vd, Mode::AvoidPlus, x)) return Mode::AvoidPlus;
  if (in_selection_region(ws, vd, Mode::AvoidMinus, x)) return Mode::AvoidMinus;
  return Mode::AvoidPlus;  // hysteresis overlap (and the Lemma 1 fallback)
}

Mode select_mode_closest(const Workspace& ws, const VirtualDestinations& vd,
                         const Vec& x) {
  if (in_selection_region(ws, vd, Mode::AvoidPlus, x)) return Mode::AvoidPlus;
  if (in_selection_region(ws, vd, Mode::AvoidMinus, x)) return Mode::AvoidMinus;
  const Obstacle& ob = ws.obstacle(vd.k);
  const double h = (vd.x_minus - vd.x_plus).dot(x - ob.center);
  if (compare(h, Rel::Gt, 0.0)) return Mode::AvoidMinus;
  return Mode::AvoidPlus;  // the side of x_plus, and the tie-break
}

Vec nearest_boundary_point(const Workspace& ws, int k) {
  const Obstacle& ob = ws.obstacle(k);
  const Vec d = ws.target() - ob.center;
  return ob.center + ob.radius * d.normalized();
}

int initial_obstacle(const Workspace& ws, const Vec& x0) {
  if (ws.size() == 0) throw std::out_of_range("initial_obstacle: empty workspace");
  std::vector<int> pool;
  for (int j = 0; j < ws.size(); ++j) {
    if (segment_hits_ball(x0, ws.target(), ws.obstacle(j).center, ws.obstacle(j).radius)) {
      pool.push_back(j);
    }
  }
  if (pool.empty()) {
    for (int j = 0; j < ws.size(); ++j) pool.push_back(j);
  }
  int best = pool.front();
  for (int j : pool) {
    if (ws.obstacle_distance(x0, j) < ws.obstacle_distance(x0, best)) best = j;
  }
  return best;
}

}  // namespace hybridnav
