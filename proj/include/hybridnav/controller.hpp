#pragma once

#include <optional>

#include "hybridnav/geometry.hpp"
#include "hybridnav/workspace.hpp"

namespace hybridnav {

/// Hybrid mode: +1/-1 steer around an obstacle on one of two sides, 0 moves
/// straight to the target.
enum class Mode : int { AvoidMinus = -1, ToDestination = 0, AvoidPlus = 1 };

inline int mode_sign(Mode m) { return static_cast<int>(m); }
inline bool is_avoidance(Mode m) { return m != Mode::ToDestination; }

/// Pair of virtual destinations for one obstacle, placed on the hat of the
/// enclosing cone symmetrically about the target-center axis, together with
/// the plane of the avoidance maneuver and the aperture of the
/// mode-selection cones.
struct VirtualDestinations {
  int k = -1;
  Vec x_plus;
  Vec x_minus;
  double distance = 0.0;  // distance from the target to either point
  double aperture = 0.0;  // half-aperture of the selection cones
  PlaneSpan plane;

  const Vec& dest(Mode m) const {
    if (m == Mode::AvoidPlus) return x_plus;
    if (m == Mode::AvoidMinus) return x_minus;
    throw std::invalid_argument("dest: no virtual destination for mode 0");
  }
};

/// Target-seeking control -gamma (x - x_d).
Vec nominal_control(const Workspace& ws, const Vec& x);

/// Places the virtual destinations of obstacle k in the plane spanned by
/// the target, the obstacle center and `entry` (the position at activation).
/// When `entry` is on the target-center line the plane is seeded with the
/// canonical basis direction least aligned with that axis.  `distance`
/// overrides the obstacle's derived virtual-destination distance when
/// positive (the runtime halves it when a destination would land inside
/// another obstacle).  Throws ParameterError when the distance violates the
/// hat or half-space constraints, or when either point leaves free space.
VirtualDestinations select_virtual_destinations(const Workspace& ws, int k,
                                                const Vec& entry, double distance = -1.0);

/// Angle at x between the obstacle center direction and the pull toward the
/// virtual destination of mode m.
double beta_angle(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                  const Vec& x);

/// Pull toward the virtual destination, gamma (x_k^m - x).
Vec kappa_bar(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x);

/// Avoidance field: the unique direction on the vision cone of the obstacle
/// closest in angle to the pull toward the virtual destination.
Vec kappa(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x);

/// Speed correction keeping the control continuous across the exit surface.
double mu(const Workspace& ws, const VirtualDestinations& vd, Mode m, const Vec& x);

/// Proximity blend: 1 deep in the shell, linear ramp of width blend_width,
/// 0 outside the active range.
double alpha(const Workspace& ws, int k, const Vec& x);

/// Full hybrid control law for state (x, k, m).  `vd` may be null when
/// m == 0.  Avoidance evaluation tolerates boundary grazing (the vision
/// half-aperture saturates at pi/2 inside the obstacle).
Vec control(const Workspace& ws, const VirtualDestinations* vd, int k, Mode m,
            const Vec& x);

// Flow and jump sets.  Closed sets use the widened comparisons, interiors
// the narrowed ones, so each flow/jump pair covers free space exactly.

/// F_k^0: free space minus the interior of the active region of k.
bool in_flow_to_destination_k(const Workspace& ws, int k, const Vec& x);

/// Intersection of all F_k^0.
bool in_flow_to_destination(const Workspace& ws, const Vec& x);

/// J_k^0: the (closed) active region of k relative to the target.
bool in_jump_to_avoidance_k(const Workspace& ws, int k, const Vec& x);

/// Union of all J_k^0.
bool in_jump_to_avoidance(const Workspace& ws, const Vec& x);

/// F_k^m (m = +-1): active region of the virtual destination minus the open
/// cone around the axis from the obstacle center away from it.
bool in_flow_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                       const Vec& x);

/// Interior of F_k^m.
bool in_flow_avoidance_interior(const Workspace& ws, const VirtualDestinations& vd,
                                Mode m, const Vec& x);

/// J_k^m: closure of the complement of F_k^m within free space.
bool in_jump_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                       const Vec& x);

/// Flow-capability cores used by the runtime: the flow conditions with the
/// free-space conjunct removed.  The executor monitors clearance through
/// its safety band instead, so grazing states keep a well-defined mode.
/// `tol` widens the set comparisons; the executor passes 0 so that jumps
/// fire on the exact boundary where the control law is continuous.
bool flow_core_to_destination(const Workspace& ws, const Vec& x, double tol = kSetTol);
bool flow_core_avoidance(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                         const Vec& x, double tol = kSetTol);

/// Membership in the mode-selection regions; exactly one of +1/-1 applies
/// outside the hysteresis overlap.
bool in_selection_region(const Workspace& ws, const VirtualDestinations& vd, Mode m,
                         const Vec& x);
bool in_selection_overlap(const Workspace& ws, const VirtualDestinations& vd,
                          const Vec& x);

/// Original mode selector: +1/-1 from the selection regions, +1 on the
/// overlap.
Mode select_mode(const Workspace& ws, const VirtualDestinations& vd, const Vec& x);

/// Overlap-splitting selector: resolves the hysteresis region by the
/// hyperplane through the obstacle center normal to x_minus - x_plus, which
/// picks the closest virtual destination; on the hyperplane picks +1.
Mode select_mode_closest(const Workspace& ws, const VirtualDestinations& vd,
                         const Vec& x);

/// Point of the obstacle boundary nearest the target.
Vec nearest_boundary_point(const Workspace& ws, int k);

/// Index of the nearest obstacle among those whose ball meets the segment
/// [x0, target]; nearest obstacle overall when none blocks.  Throws
/// std::out_of_range for an empty workspace.
int initial_obstacle(const Workspace& ws, const Vec& x0);

}  // namespace hybridnav
