#include "hybridnav/executor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridnav/errors.hpp"

namespace hybridnav {

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Converged: return "converged";
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::SafetyFault: return "safety-fault";
    case OutcomeKind::ZenoFault: return "zeno-fault";
  }
  return "unknown";
}

namespace {

// Bisection depth for locating a flow-set exit inside one step.  Post-step
// detection alone leaves the state O(|u| dt) past the boundary, which would
// turn the designed-continuous mode switches into visible control jumps.
constexpr int kBisectIters = 60;

// Standoff for the surface clamp, relative to the obstacle radius.  The
// vision half-angle asin(r/rho) has unbounded slope at rho = r, so a state
// parked at machine-contact makes the steering terms jitter at the
// sqrt(eps) scale and mode releases fired there show O(1e-7) control gaps.
// Holding grazes 1e-10 r off the surface keeps the angle well conditioned
// while moving the path by less than any stated tolerance.
constexpr double kSurfaceLift = 1e-10;

class Runner {
 public:
  Runner(const Workspace& ws, const Vec& x0, const RunConfig& cfg)
      : true_ws_(ws), cfg_(cfg), x_(x0) {
    if (cfg_.drive && ws.dimension() != 2) {
      throw ParameterError("differential-drive runs require a two-dimensional workspace");
    }
    if (cfg_.drive) heading_ = cfg_.drive->heading0;
  }

  RunResult run();

 private:
  const Workspace& world() const { return cfg_.sensor ? *detected_ : true_ws_; }
  const VirtualDestinations* vd_ptr() const { return vd_ ? &*vd_ : nullptr; }

  void sense();
  int index_of(int id) const;
  bool sight_clear_of(int k, const Vec& x) const;
  bool capable(const Vec& x) const;
  bool resolve(bool initial);
  void activate(int k_new, bool initial);
  VirtualDestinations make_vd(int k_new) const;
  void log_jump(bool initial, int k_from_id, int m_from, const Vec& u_before);
  Vec clamp_to_surface(Vec y) const;
  void integrate_once();
  Vec state_vector() const;
  void commit(const Vec& y, double h);
  Vec deriv(const Vec& y) const;
  Vec rk4(const Vec& y0, double h) const;
  void record_sample();
  void fault(OutcomeKind kind, const std::string& detail);
  bool finished() const { return done_; }

  const Workspace& true_ws_;
  RunConfig cfg_;
  std::optional<Workspace> detected_;  // rebuilt each sensing cycle
  ObstacleTracker tracker_;
  std::vector<int> ids_;  // stable id of each obstacle index in world()

  Vec x_;
  double heading_ = 0.0;
  double t_ = 0.0;
  int j_ = 0;
  int k_ = -1;     // index into world()
  int k_id_ = -1;  // stable identity of k_
  Mode m_ = Mode::ToDestination;
  std::optional<VirtualDestinations> vd_;
  double umax_ = 0.0;

  Trajectory trajectory_;
  Outcome outcome_;
  bool done_ = false;
};

void Runner::fault(OutcomeKind kind, const std::string& detail) {
  outcome_.kind = kind;
  outcome_.t = t_;
  outcome_.jumps = j_;
  outcome_.detail = detail;
  done_ = true;
}

void Runner::sense() {
  const DetectionResult det = detect_obstacles(true_ws_, x_, *cfg_.sensor);
  tracker_.update(det.obstacles, is_avoidance(m_) ? k_id_ : -1);
  std::vector<Ball> balls;
  ids_.clear();
  for (const auto& tr : tracker_.visible()) {
    balls.push_back(tr.ball);
    ids_.push_back(tr.id);
  }
  WorkspaceParams p = true_ws_.params();
  p.sensor_range = cfg_.sensor->range;
  p.blend_width = 0.0;  // re-derive: detected active ranges shrink with R
  detected_ = Workspace::from_sensor(true_ws_.dimension(), std::move(balls),
                                     true_ws_.target(), p);
  k_ = index_of(k_id_);
  if (vd_ && k_ >= 0) vd_->k = k_;
}

int Runner::index_of(int id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return static_cast<int>(i);
  }
  return -1;
}

// After an avoidance maneuver hands control back with the index unchanged,
// the state still sits inside that obstacle's active region.  The designed
// exit leaves the target in direct sight, and under the nominal field the
// segment [x, target] only ever shrinks into itself, so sight stays clear
// for the rest of the run.  Flowing through the region of the current index
// while sight is clear is therefore safe and prevents immediate
// re-activation; if sight is blocked (a truncated maneuver, or a fresh
// initialization inside the region), re-activation stays admissible.  The
// tolerance matches one integration step of the nominal field.
bool Runner::sight_clear_of(int k, const Vec& x) const {
  if (k < 0) return false;
  const Workspace& w = world();
  const Obstacle& ob = w.obstacle(k);
  const double tol =
      std::max(1e-9, 0.25 * w.params().gamma * cfg_.dt * (x - w.target()).norm());
  return segment_distance(ob.center, x, w.target()) >= ob.radius - tol;
}

bool Runner::capable(const Vec& x) const {
  // Exact-boundary membership (tol 0): bisection then lands the jump on the
  // surface where the control law is continuous, not a tolerance band past it.
  const Workspace& w = world();
  if (!is_avoidance(m_)) {
    for (int k2 = 0; k2 < w.size(); ++k2) {
      if (!w.in_active_core_interior(x, k2, w.target(), -1.0, 0.0)) continue;
      if (cfg_.guarded_mode_map && k2 == k_ && sight_clear_of(k2, x)) continue;
      return false;
    }
    return true;
  }
  return k_ >= 0 && vd_ && flow_core_avoidance(w, *vd_, m_, x, 0.0);
}

VirtualDestinations Runner::make_vd(int k_new) const {
  const Workspace& w = world();
  const Vec& entry = cfg_.vd_plane_seed ? *cfg_.vd_plane_seed : x_;
  double e = w.obstacle(k_new).vd_distance;
  std::string reason;
  for (int attempt = 0; attempt < 24; ++attempt, e *= 0.5) {
    try {
      return select_virtual_destinations(w, k_new, entry, e);
    } catch (const ParameterError& err) {
      reason = err.what();
    }
  }
  throw ParameterError("no admissible virtual destinations: " + reason);
}

void Runner::log_jump(bool initial, int k_from_id, int m_from, const Vec& u_before) {
  if (initial) return;  // (k, m)(0,0) is free initialization, not a solution jump
  ++j_;
  SwitchEvent ev;
  ev.t = t_;
  ev.j = j_;
  ev.x = x_;
  ev.k_from = k_from_id;
  ev.k_to = k_id_;
  ev.m_from = m_from;
  ev.m_to = mode_sign(m_);
  ev.u_before = u_before;
  ev.u_after = control(world(), vd_ptr(), k_, m_, x_);
  trajectory_.switches.push_back(std::move(ev));
}

void Runner::activate(int k_new, bool initial) {
  const Workspace& w = world();
  const Vec u_before = control(w, vd_ptr(), k_, m_, x_);
  const int k_from_id = k_id_;
  const int m_from = mode_sign(m_);
  vd_ = make_vd(k_new);
  k_ = k_new;
  k_id_ = ids_.at(k_new);
  m_ = cfg_.closest_vd_map ? select_mode_closest(w, *vd_, x_) : select_mode(w, *vd_, x_);
  log_jump(initial, k_from_id, m_from, u_before);
  trajectory_.activations.push_back(ActivationRecord{k_id_, t_, j_, x_, *vd_});
}

bool Runner::resolve(bool initial) {
  const Workspace& w = world();
  for (int used = 0; used < cfg_.jump_budget; ++used) {
    if (capable(x_)) return true;
    if (is_avoidance(m_)) {
      // Leave the maneuver: (k, m) -> (k, 0).
      const Vec u_before = control(w, vd_ptr(), k_, m_, x_);
      const int m_from = mode_sign(m_);
      m_ = Mode::ToDestination;
      vd_.reset();
      log_jump(initial, k_id_, m_from, u_before);
      continue;
    }
    // Activation: the state sits strictly inside some target-relative
    // active region.  Pick the nearest admissible obstacle; the guarded
    // map lets the state flow through the region of the current index
    // while the target is in direct sight (see sight_clear_of), so only
    // obstacles that actually block progress are candidates.
    int pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int k2 = 0; k2 < w.size(); ++k2) {
      // Same exact-boundary membership as capable(), or a state located on
      // the boundary itself would be neither able to flow nor to jump.
      if (!w.in_active_core_interior(x_, k2, w.target(), -1.0, 0.0)) continue;
      if (cfg_.guarded_mode_map && k2 == k_ && sight_clear_of(k2, x_)) continue;
      const double dist = w.obstacle_distance(x_, k2);
      if (dist < best) {
        best = dist;
        pick = k2;
      }
    }
    if (pick < 0) {
      fault(OutcomeKind::ZenoFault, "no admissible jump from a non-flow state");
      return false;
    }
    try {
      activate(pick, initial);
    } catch (const ParameterError& err) {
      fault(OutcomeKind::ZenoFault, err.what());
      return false;
    }
  }
  fault(OutcomeKind::ZenoFault, "jump budget exhausted");
  return false;
}

Vec Runner::state_vector() const {
  if (!cfg_.drive) return x_;
  Vec y(x_.size() + 1);
  y.head(x_.size()) = x_;
  y[x_.size()] = heading_;
  return y;
}

void Runner::commit(const Vec& y, double h) {
  if (!cfg_.drive) {
    x_ = y;
  } else {
    x_ = y.head(y.size() - 1);
    heading_ = wrap_angle(y[y.size() - 1]);
  }
  t_ += h;
}

Vec Runner::deriv(const Vec& y) const {
  if (!cfg_.drive) return control(world(), vd_ptr(), k_, m_, y);
  const Vec x = y.head(y.size() - 1);
  const double phi = y[y.size() - 1];
  const Vec u = control(world(), vd_ptr(), k_, m_, x);
  const DriveCommand cmd = adapt_drive(u, phi, *cfg_.drive);
  Vec d(3);
  d << cmd.v * std::cos(phi), cmd.v * std::sin(phi), cmd.omega;
  return d;
}

Vec Runner::rk4(const Vec& y0, double h) const {
  const Vec k1 = deriv(y0);
  const Vec k2 = deriv(y0 + (0.5 * h) * k1);
  const Vec k3 = deriv(y0 + (0.5 * h) * k2);
  const Vec k4 = deriv(y0 + h * k3);
  return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// The avoidance field is tangent at obstacle surfaces, so the exact flow
// never enters an open ball; a fixed-step integrator can overshoot the
// non-Lipschitz surface approach by O(dt^2) and then ride just inside.
// Project such overshoot radially back onto the surface; anything deeper
// than one step of motion is a genuine violation and is left for the
// safety monitor.  The clamp is part of the discrete flow map: capability
// is always evaluated on the state that would actually be committed.
Vec Runner::clamp_to_surface(Vec y) const {
  if (cfg_.drive) return y;
  const Workspace& w = world();
  const double band = umax_ * cfg_.dt + 1e-12;
  for (int k2 = 0; k2 < w.size(); ++k2) {
    const Obstacle& ob = w.obstacle(k2);
    const Vec rad = y - ob.center;
    const double rho = rad.norm();
    const double hold = ob.radius * (1.0 + kSurfaceLift);
    if (rho < hold && ob.radius - rho <= band && rho > 0.0) {
      y = ob.center + (hold / rho) * rad;
    }
  }
  return y;
}

void Runner::integrate_once() {
  const Vec y0 = state_vector();
  const auto position = [&](const Vec& y) -> Vec {
    return cfg_.drive ? Vec(y.head(y.size() - 1)) : y;
  };
  Vec y1 = clamp_to_surface(rk4(y0, cfg_.dt));
  if (capable(position(y1))) {
    commit(y1, cfg_.dt);
    return;
  }
  // The flow left its set inside this step; bisect to the earliest exit so
  // the jump fires essentially on the set boundary.
  double lo = 0.0;
  double hi = cfg_.dt;
  for (int i = 0; i < kBisectIters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Vec ym = clamp_to_surface(rk4(y0, mid));
    if (capable(position(ym))) {
      lo = mid;
    } else {
      hi = mid;
      y1 = ym;
    }
  }
  commit(y1, hi);
}

void Runner::record_sample() {
  Sample s;
  s.t = t_;
  s.j = j_;
  s.x = x_;
  s.k = k_id_;
  s.m = mode_sign(m_);
  s.u = control(world(), vd_ptr(), k_, m_, x_);
  s.clearance = true_ws_.clearance(x_);
  if (cfg_.drive) {
    s.heading = heading_;
    const DriveCommand cmd = adapt_drive(s.u, heading_, *cfg_.drive);
    s.v = cmd.v;
    s.omega = cmd.omega;
  }
  umax_ = std::max(umax_, s.u.norm());
  trajectory_.samples.push_back(std::move(s));
}

RunResult Runner::run() {
  if (x_.size() != true_ws_.dimension()) {
    throw ParameterError("initial state dimension mismatch");
  }
  if (!true_ws_.in_free_space(x_)) {
    fault(OutcomeKind::SafetyFault, "initial state outside free space");
    return {std::move(trajectory_), outcome_};
  }

  if (cfg_.sensor) {
    sense();
  } else {
    for (int k2 = 0; k2 < true_ws_.size(); ++k2) ids_.push_back(k2);
  }
  if (world().size() > 0) {
    k_ = initial_obstacle(world(), x_);
    k_id_ = ids_.at(k_);
  }

  // Free initialization of (k, m)(0,0): resolve the mode without recording
  // jumps, so a start inside an active region begins avoiding directly.
  if (!resolve(/*initial=*/true)) return {std::move(trajectory_), outcome_};
  record_sample();

  const double e_c = true_ws_.convergence_radius();
  const long max_iterations =
      static_cast<long>(cfg_.t_max / cfg_.dt) * 4 + 10000;
  long iterations = 0;

  while (!done_) {
    if ((x_ - true_ws_.target()).norm() <= e_c) {
      outcome_.kind = OutcomeKind::Converged;
      outcome_.t = t_;
      outcome_.jumps = j_;
      break;
    }
    const double safety_band = umax_ * cfg_.dt + 1e-12;
    if (trajectory_.samples.back().clearance < -safety_band) {
      std::ostringstream os;
      os << "clearance " << trajectory_.samples.back().clearance
         << " fell below the safety band " << -safety_band;
      fault(OutcomeKind::SafetyFault, os.str());
      break;
    }
    if (t_ >= cfg_.t_max - 1e-12) {
      outcome_.kind = OutcomeKind::Timeout;
      outcome_.t = t_;
      outcome_.jumps = j_;
      outcome_.detail = "t_max reached before convergence";
      break;
    }
    if (++iterations > max_iterations) {
      fault(OutcomeKind::ZenoFault, "integration stalled without temporal progress");
      break;
    }
    integrate_once();
    if (cfg_.sensor) sense();
    if (!resolve(/*initial=*/false)) break;
    record_sample();
  }
  return {std::move(trajectory_), outcome_};
}

}  // namespace

RunResult run(const Workspace& ws, const Vec& x0, const RunConfig& cfg) {
  Runner runner(ws, x0, cfg);
  return runner.run();
}

}  // namespace hybridnav
