#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridnav/controller.hpp"
#include "hybridnav/diffdrive.hpp"
#include "hybridnav/sensor.hpp"

namespace hybridnav {

enum class OutcomeKind { Converged, Timeout, SafetyFault, ZenoFault };

const char* to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  double t = 0.0;
  int jumps = 0;
  std::string detail;
};

/// One recorded state along a run.  `u` is the commanded velocity at this
/// state; unicycle runs also log heading and the actuated (v, omega).
struct Sample {
  double t = 0.0;
  int j = 0;
  Vec x;
  int k = -1;
  int m = 0;
  Vec u;
  double clearance = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

/// A discrete transition: state, modes on both sides, and the commanded
/// velocity evaluated immediately before and after.
struct SwitchEvent {
  double t = 0.0;
  int j = 0;  // jump counter after the event
  Vec x;
  int k_from = -1;
  int k_to = -1;
  int m_from = 0;
  int m_to = 0;
  Vec u_before;
  Vec u_after;
};

/// One avoidance maneuver: which obstacle engaged, when, and the virtual
/// destination pair (with its plane) chosen at entry.
struct ActivationRecord {
  int obstacle_id = -1;  // stable identity (track id under sensing)
  double t = 0.0;
  int j = 0;
  Vec entry;
  VirtualDestinations vd;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<SwitchEvent> switches;
  std::vector<ActivationRecord> activations;
};

struct RunConfig {
  double dt = 1e-3;
  double t_max = 60.0;
  int jump_budget = 64;       // per resolution of one flow interruption
  bool guarded_mode_map = true;   // flow through the current obstacle's region
                                  // instead of re-activating while the target
                                  // is in direct sight
  bool closest_vd_map = true;     // overlap regions split by nearest virtual destination
  std::optional<ScanConfig> sensor;   // run from reconstructed obstacles
  std::optional<DriveParams> drive;   // run through the differential-drive adapter (2-D)
  std::optional<Vec> vd_plane_seed;   // diagnostic override of the plane's entry point
};

struct RunResult {
  Trajectory trajectory;
  Outcome outcome;
};

/// Integrates the closed loop from `x0` until convergence, timeout, or a
/// fault.  Safety is always judged against the true workspace, even when
/// the controller runs from sensed reconstructions.
RunResult run(const Workspace& ws, const Vec& x0, const RunConfig& cfg);

}  // namespace hybridnav
