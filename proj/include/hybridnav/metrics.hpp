#pragma once

#include <iosfwd>
#include <string>

#include "hybridnav/executor.hpp"

namespace hybridnav {

/// Summary statistics of one closed-loop run.
struct RunMetrics {
  OutcomeKind outcome = OutcomeKind::Timeout;
  double t_final = 0.0;
  int jumps = 0;
  int activations = 0;
  int max_activations_per_obstacle = 0;
  double path_length = 0.0;
  double straight_line = 0.0;       // ||x0 - target||
  double length_deviation_pct = 0.0;  // 100 (L - l) / l
  double final_error = 0.0;         // distance to target at the end
  double min_clearance = 0.0;
  double max_flow_control_step = 0.0;  // largest ||u_{i+1} - u_i|| between samples of equal j
  double max_jump_control_gap = 0.0;   // largest ||u_after - u_before|| across recorded jumps
  std::string detail;
};

RunMetrics compute_metrics(const RunResult& result, const Vec& target);

/// Plain `key value` lines, doubles printed with %.17g.  Deterministic:
/// identical runs serialize to identical bytes (no timestamps).
void write_metrics(std::ostream& os, const RunMetrics& m);

/// CSV trajectory: t,j,x_*,k,m,u_*,clearance and, when `drive` is set,
/// heading,v,omega.  Same determinism contract as the metrics writer.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dimension, bool drive);

}  // namespace hybridnav
