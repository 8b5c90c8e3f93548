#include "hybridnav/metrics.hpp"

#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

namespace hybridnav {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunMetrics compute_metrics(const RunResult& result, const Vec& target) {
  const Trajectory& traj = result.trajectory;
  RunMetrics m;
  m.outcome = result.outcome.kind;
  m.t_final = result.outcome.t;
  m.jumps = result.outcome.jumps;
  m.detail = result.outcome.detail;
  m.activations = static_cast<int>(traj.activations.size());

  std::map<int, int> per_obstacle;
  for (const ActivationRecord& a : traj.activations) {
    m.max_activations_per_obstacle =
        std::max(m.max_activations_per_obstacle, ++per_obstacle[a.obstacle_id]);
  }

  if (!traj.samples.empty()) {
    m.straight_line = (traj.samples.front().x - target).norm();
    m.final_error = (traj.samples.back().x - target).norm();
    m.min_clearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const Sample& s = traj.samples[i];
      m.min_clearance = std::min(m.min_clearance, s.clearance);
      if (i == 0) continue;
      const Sample& p = traj.samples[i - 1];
      m.path_length += (s.x - p.x).norm();
      if (s.j == p.j) {
        m.max_flow_control_step = std::max(m.max_flow_control_step, (s.u - p.u).norm());
      }
    }
    if (m.straight_line > 0.0) {
      m.length_deviation_pct = 100.0 * (m.path_length - m.straight_line) / m.straight_line;
    }
  }
  for (const SwitchEvent& sw : traj.switches) {
    m.max_jump_control_gap =
        std::max(m.max_jump_control_gap, (sw.u_after - sw.u_before).norm());
  }
  return m;
}

void write_metrics(std::ostream& os, const RunMetrics& m) {
  os << "outcome " << to_string(m.outcome) << '\n';
  os << "t_final " << fmt(m.t_final) << '\n';
  os << "jumps " << m.jumps << '\n';
  os << "activations " << m.activations << '\n';
  os << "max_activations_per_obstacle " << m.max_activations_per_obstacle << '\n';
  os << "path_length " << fmt(m.path_length) << '\n';
  os << "straight_line " << fmt(m.straight_line) << '\n';
  os << "length_deviation_pct " << fmt(m.length_deviation_pct) << '\n';
  os << "final_error " << fmt(m.final_error) << '\n';
  os << "min_clearance " << fmt(m.min_clearance) << '\n';
  os << "max_flow_control_step " << fmt(m.max_flow_control_step) << '\n';
  os << "max_jump_control_gap " << fmt(m.max_jump_control_gap) << '\n';
  if (!m.detail.empty()) os << "detail " << m.detail << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dimension,
                          bool drive) {
  os << "t,j";
  for (int i = 1; i <= dimension; ++i) os << ",x_" << i;
  os << ",k,m";
  for (int i = 1; i <= dimension; ++i) os << ",u_" << i;
  os << ",clearance";
  if (drive) os << ",heading,v,omega";
  os << '\n';
  for (const Sample& s : traj.samples) {
    os << fmt(s.t) << ',' << s.j;
    for (int i = 0; i < dimension; ++i) os << ',' << fmt(s.x[i]);
    os << ',' << s.k << ',' << s.m;
    for (int i = 0; i < dimension; ++i) os << ',' << fmt(s.u[i]);
    os << ',' << fmt(s.clearance);
    if (drive) os << ',' << fmt(s.heading) << ',' << fmt(s.v) << ',' << fmt(s.omega);
    os << '\n';
  }
}

}  // namespace hybridnav
