#pragma once

#include <cmath>
#include <stdexcept>

#include "hybridnav/geometry.hpp"

namespace hybridnav {

/// Differential-drive limits and gains.
struct DriveParams {
  double v_max = 0.31;    // m/s
  double omega_max = 1.9;  // rad/s
  double k_v = 0.1;
  int p = 1;
  double heading0 = 0.0;  // initial heading, radians
};

struct DriveCommand {
  double v = 0.0;
  double omega = 0.0;
};

/// Wraps an angle to (-pi, pi]; a difference of exactly pi maps to +pi.
inline double wrap_angle(double a) {
  double r = std::fmod(a + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

/// Maps a planar velocity command onto saturated forward and angular
/// speeds.  The forward speed is scaled by cos(dphi/2)^(2p), so the robot
/// mostly turns in place when badly aligned, and the turn rate follows
/// sin(dphi/2).
inline DriveCommand adapt_drive(const Vec& u, double heading, const DriveParams& dp) {
  if (u.size() != 2) throw std::invalid_argument("adapt_drive: planar commands only");
  DriveCommand cmd;
  const double speed = u.norm();
  if (speed == 0.0) return cmd;
  const double dphi = wrap_angle(std::atan2(u[1], u[0]) - heading);
  const double c = std::cos(dphi / 2.0);
  cmd.v = std::min(dp.v_max, dp.k_v * speed * std::pow(c * c, dp.p));
  cmd.omega = dp.omega_max * std::sin(dphi / 2.0);
  return cmd;
}

}  // namespace hybridnav
