#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hybridnav/geometry.hpp"
#include "hybridnav/rng.hpp"

namespace hybridnav {

/// Spherical obstacle with its derived avoidance parameters.
struct Obstacle {
  Vec center;
  double radius = 0.0;

  // Derived at workspace construction.
  double active_range = 0.0;     // shell width of the target-relative active region
  double vd_active_range = 0.0;  // wider shell used relative to virtual destinations
  double vd_distance = 0.0;      // distance from the target to each virtual destination
  double aperture = 0.0;         // half-aperture of the mode-selection cones
};

/// Input description of one ball.
struct Ball {
  Vec center;
  double radius = 0.0;
};

/// Tunables and derivation policies.  Factors are in (0, 1).
struct WorkspaceParams {
  double gamma = 1.5;                 // nominal control gain
  double blend_width = 0.0;           // epsilon; <= 0 selects 0.5 * min active_range
  double convergence_radius = 1e-2;   // stop radius around the target
  double active_range_factor = 0.5;   // active_range = f * min(clearance bound, sensor range, radius)
  double vd_distance_factor = 0.9;    // vd_distance = f * min(surface junction, half-space bound)
  double aperture_factor = 0.9;       // aperture = f * min(psi/2, (pi - psi)/2)
  double sensor_range = std::numeric_limits<double>::infinity();
};

/// Free space punctured by disjoint spherical obstacles, with a fixed target.
/// Instances are only created through `create` (strictly validated) or
/// `from_sensor` (tolerant, for reconstructed worlds), so every reachable
/// Workspace has consistent derived parameters.
class Workspace {
 public:
  /// Returns the list of validation violations; empty means valid.
  static std::vector<std::string> check(int dimension, const std::vector<Ball>& balls,
                                        const Vec& target, const WorkspaceParams& params);

  /// Validates and builds; throws ValidationError listing every violation.
  static Workspace create(int dimension, std::vector<Ball> balls, Vec target,
                          WorkspaceParams params);

  /// Builds from reconstructed obstacles without disjointness guarantees;
  /// clearance-derived quantities are clamped to stay positive.
  static Workspace from_sensor(int dimension, std::vector<Ball> balls, Vec target,
                               WorkspaceParams params);

  int dimension() const { return dimension_; }
  int size() const { return static_cast<int>(obstacles_.size()); }
  const Obstacle& obstacle(int k) const { return obstacles_.at(k); }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const Vec& target() const { return target_; }
  double gamma() const { return params_.gamma; }
  double blend_width() const { return blend_width_; }
  double convergence_radius() const { return params_.convergence_radius; }
  const WorkspaceParams& params() const { return params_; }

  /// Distance from q to obstacle k as a set: |q - c_k| - r_k.
  double obstacle_distance(const Vec& q, int k) const;

  /// min_k obstacle_distance; +inf when there are no obstacles.
  double clearance(const Vec& q) const;

  /// Closed free-space membership.
  bool in_free_space(const Vec& q) const;

  /// Half-aperture of the vision cone of obstacle k seen from q,
  /// asin(r_k / |q - c_k|).  Throws std::domain_error strictly inside.
  double theta(const Vec& q, int k) const;

  /// Shadow of obstacle k relative to a destination: the part of free space
  /// inside the enclosing cone from `dest` and beyond the sphere with
  /// diameter [dest, c_k].
  bool in_shadow(const Vec& q, int k, const Vec& dest) const;

  /// Active region: shadow truncated to the shell |q - c_k| <= r_k + shell.
  /// A non-positive `shell` selects the target shell width `active_range`;
  /// regions relative to virtual destinations pass `vd_active_range` so a
  /// maneuver finishes through the exit set before the shell truncates it.
  bool in_active_region(const Vec& q, int k, const Vec& dest, double shell = -1.0) const;

  /// Interior of the active region (strict comparisons on the cone, the
  /// truncating sphere and the shell; free space stays closed).
  bool in_active_interior(const Vec& q, int k, const Vec& dest, double shell = -1.0) const;

  /// Geometric core of the active region: the same cone, half-space and
  /// shell conditions without the free-space conjunct.  The runtime flows
  /// and jumps on these cores while a separate safety monitor owns the
  /// clearance, so a state grazing an obstacle surface within integration
  /// error cannot stall the jump logic.  `tol` widens every comparison; the
  /// executor passes 0 so jumps localize on the exact boundary, where the
  /// control law is continuous by construction.
  bool in_active_core(const Vec& q, int k, const Vec& dest, double shell = -1.0,
                      double tol = kSetTol) const;

  /// Interior of the geometric core (strict comparisons throughout).
  bool in_active_core_interior(const Vec& q, int k, const Vec& dest, double shell = -1.0,
                               double tol = kSetTol) const;

  /// Lateral surface of the enclosing cone, within free space.
  bool on_cone_surface(const Vec& q, int k, const Vec& dest) const;

  /// Exit set: cone surface inside the active region.
  bool in_exit_set(const Vec& q, int k, const Vec& dest) const;

  /// Hat: cone surface outside the active region.
  bool in_hat(const Vec& q, int k, const Vec& dest) const;

  /// Union of active regions relative to the target.
  bool in_active_free_space(const Vec& q) const;

  /// Indices whose obstacle boundary meets the shadow of k (so their
  /// clearance bounds the active range).  Deterministic boundary sampling
  /// with an analytic cone-miss shortcut.
  std::vector<int> hidden_obstacles(int k, const Vec& dest,
                                    int samples_per_obstacle = 4096) const;

  /// min over hidden obstacles of (|c_k - c_j| - r_k - r_j); +inf if none.
  double r_hat(int k, const Vec& dest, int samples_per_obstacle = 4096) const;

 private:
  Workspace() = default;

  static Workspace build(int dimension, std::vector<Ball> balls, Vec target,
                         WorkspaceParams params, bool strict);

  int dimension_ = 0;
  std::vector<Obstacle> obstacles_;
  Vec target_;
  WorkspaceParams params_;
  double blend_width_ = 0.0;
};

/// Deterministic, approximately uniform points on a sphere boundary:
/// uniform angles (n = 2), Fibonacci lattice (n = 3), seeded Gaussian
/// directions otherwise.
std::vector<Vec> sample_ball_boundary(const Vec& center, double radius, int count);

/// Rejection-samples a free-space point with at least `margin` clearance,
/// inside the bounding box of obstacles and target inflated by `pad`.
Vec sample_free_point(const Workspace& ws, SplitMix64& rng, double margin = 1e-3,
                      double pad = 2.0);

}  // namespace hybridnav
