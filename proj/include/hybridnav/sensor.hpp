#pragma once

#include <string>
#include <vector>

#include "hybridnav/workspace.hpp"

namespace hybridnav {

/// Range-scanner model: angular resolution, range limit, and the
/// reconstruction safeguards (gap splitting, symmetry filter, dilation).
struct ScanConfig {
  double range = 2.0;              // maximum sensing radius
  double azimuth_step_deg = 0.5;   // beam spacing around the robot
  double polar_step_deg = 1.0;     // elevation spacing (3-D only)
  double margin = 0.02;            // dilation added to estimated radii
  double gap_factor = 5.0;         // split threshold in units of rho * step
  double symmetry_tol = 0.1;       // relative tolerance of the symmetry test
};

/// One beam of a scan.  `range` is the sensing limit when `hit` is false.
struct ScanPoint {
  Vec direction;  // unit vector from the scan origin
  double range = 0.0;
  bool hit = false;
};

/// A polar scan.  2-D scans have one polar row; 3-D scans are a grid of
/// polar rows (colatitude) by azimuth columns, row-major in `points`.
struct Scan {
  Vec origin;
  double range_limit = 0.0;
  int n_polar = 1;
  int n_azimuth = 0;
  std::vector<ScanPoint> points;

  const ScanPoint& at(int ip, int ia) const { return points[static_cast<std::size_t>(ip) * n_azimuth + ia]; }
  Vec point(int ip, int ia) const {
    const ScanPoint& s = at(ip, ia);
    return origin + s.range * s.direction;
  }
};

/// A contiguous group of returns believed to come from one obstacle.
/// Indices are (polar, azimuth) pairs; 2-D arcs keep angular order.
struct ScanSegment {
  std::vector<std::pair<int, int>> cells;
};

struct Reconstruction {
  bool ok = false;         // geometry solvable
  bool symmetric = false;  // passed the truncation-symmetry test
  Ball ball;               // estimate before dilation
  std::string note;        // failure reason when !ok or !symmetric
};

/// Casts beams against the true obstacle set.  Works for dimension 2 or 3.
Scan scan_environment(const Workspace& ws, const Vec& x, const ScanConfig& cfg);

/// Groups returns into per-obstacle segments: consecutive (or
/// grid-adjacent) hits whose range gap stays below
/// gap_factor * min(rho) * step.  2-D segments merge across the 0/360 seam.
std::vector<ScanSegment> segment_scan(const Scan& scan, const ScanConfig& cfg);

/// Fits a ball to one segment.  Only symmetric truncations give unbiased
/// fits, so asymmetric segments are flagged and callers must drop them.
Reconstruction reconstruct_segment(const Scan& scan, const ScanSegment& seg, const ScanConfig& cfg);

/// Fits a circle to an ordered 2-D arc of boundary points seen from
/// `origin`.  Exposed separately so exact synthetic arcs can be checked.
Reconstruction fit_circle_2d(const std::vector<Vec>& arc, const Vec& origin, double symmetry_tol);

/// Fits a sphere to a 3-D cap sample.  `rim` holds the cap's boundary
/// points (used by the symmetry test); `cap` holds every sampled point.
Reconstruction fit_sphere_3d(const std::vector<Vec>& cap, const std::vector<Vec>& rim, const Vec& origin,
                             double symmetry_tol);

struct DetectionResult {
  std::vector<Ball> obstacles;  // dilated by cfg.margin
  int segments_total = 0;
  int segments_dropped = 0;  // asymmetric or unsolvable
};

/// Full pipeline: scan, segment, fit, filter, dilate.
DetectionResult detect_obstacles(const Workspace& ws, const Vec& x, const ScanConfig& cfg);

/// Associates per-cycle detections with persistent obstacle identities.
/// A detection within half a track's radius of its stored center refreshes
/// that track; anything else opens a new one.  The frozen track (the
/// obstacle being avoided) keeps its stored estimate even when refreshed,
/// so the active maneuver's geometry never shifts underneath the
/// controller.
class ObstacleTracker {
 public:
  struct Track {
    int id = -1;
    Ball ball;
    bool visible = false;
  };

  /// Feeds one detection cycle.  `frozen_id` < 0 means nothing is frozen.
  void update(const std::vector<Ball>& detections, int frozen_id);

  /// Tracks visible this cycle (frozen track included even if unseen).
  std::vector<Track> visible() const;

  const std::vector<Track>& all() const { return tracks_; }

 private:
  std::vector<Track> tracks_;
  int next_id_ = 0;
};

}  // namespace hybridnav
