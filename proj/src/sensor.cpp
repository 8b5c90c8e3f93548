#include "hybridnav/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hybridnav/errors.hpp"

namespace hybridnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nearest non-negative ray-sphere intersection parameter, or +inf.
double ray_ball(const Vec& x, const Vec& dir, const Vec& center, double radius) {
  const Vec w = center - x;
  const double proj = dir.dot(w);
  const double disc = proj * proj - (w.squaredNorm() - radius * radius);
  if (disc < 0.0) return kInf;
  const double s = std::sqrt(disc);
  if (proj - s >= 0.0) return proj - s;
  if (proj + s >= 0.0) return proj + s;
  return kInf;
}

int beam_count(double step_deg, double span_deg, const char* what) {
  if (!(step_deg > 0.0)) throw ParameterError(std::string(what) + " resolution must be positive");
  const double n = span_deg / step_deg;
  const int count = static_cast<int>(std::lround(n));
  if (count < 1 || std::abs(n - count) > 1e-9) {
    throw ParameterError(std::string(what) + " resolution must divide the angular span");
  }
  return count;
}

}  // namespace

Scan scan_environment(const Workspace& ws, const Vec& x, const ScanConfig& cfg) {
  if (!(cfg.range > 0.0)) throw ParameterError("sensor range must be positive");
  const int n = ws.dimension();
  if (n != 2 && n != 3) throw ParameterError("range scans support dimensions 2 and 3 only");

  Scan scan;
  scan.origin = x;
  scan.range_limit = cfg.range;
  scan.n_azimuth = beam_count(cfg.azimuth_step_deg, 360.0, "azimuth");
  scan.n_polar = n == 2 ? 1 : beam_count(cfg.polar_step_deg, 180.0, "polar");
  scan.points.reserve(static_cast<std::size_t>(scan.n_polar) * scan.n_azimuth);

  for (int ip = 0; ip < scan.n_polar; ++ip) {
    const double theta = n == 2 ? 0.0 : M_PI * cfg.polar_step_deg * ip / 180.0;
    for (int ia = 0; ia < scan.n_azimuth; ++ia) {
      const double psi = M_PI * cfg.azimuth_step_deg * ia / 180.0;
      Vec dir(n);
      if (n == 2) {
        dir << std::cos(psi), std::sin(psi);
      } else {
        dir << std::cos(psi) * std::sin(theta), std::sin(psi) * std::sin(theta),
            std::cos(theta);
      }
      double best = kInf;
      for (const Obstacle& ob : ws.obstacles()) {
        best = std::min(best, ray_ball(x, dir, ob.center, ob.radius));
      }
      ScanPoint p;
      p.direction = std::move(dir);
      p.hit = best <= cfg.range;
      p.range = p.hit ? best : cfg.range;
      scan.points.push_back(std::move(p));
    }
  }
  return scan;
}

namespace {

// Range-gap splitting rule: adjacent returns belong to one surface when the
// gap stays within gap_factor times the expected inter-beam spacing.
bool gap_ok(double r1, double r2, double step_rad, double gap_factor) {
  return std::abs(r1 - r2) <= gap_factor * std::min(r1, r2) * step_rad;
}

std::vector<ScanSegment> segment_scan_2d(const Scan& scan, const ScanConfig& cfg) {
  const int na = scan.n_azimuth;
  const double step_rad = 2.0 * M_PI / na;
  std::vector<ScanSegment> segs;
  ScanSegment cur;
  auto flush = [&] {
    if (!cur.cells.empty()) segs.push_back(std::move(cur));
    cur = ScanSegment{};
  };
  for (int ia = 0; ia < na; ++ia) {
    const ScanPoint& p = scan.points[ia];
    if (!p.hit) {
      flush();
      continue;
    }
    if (!cur.cells.empty() &&
        !gap_ok(scan.points[cur.cells.back().second].range, p.range, step_rad,
                cfg.gap_factor)) {
      flush();
    }
    cur.cells.push_back({0, ia});
  }
  flush();
  // Merge across the 0/360 seam so one obstacle never splits in two there.
  if (segs.size() >= 2) {
    ScanSegment& first = segs.front();
    ScanSegment& last = segs.back();
    if (first.cells.front().second == 0 && last.cells.back().second == na - 1 &&
        gap_ok(scan.points[na - 1].range, scan.points[0].range, step_rad, cfg.gap_factor)) {
      last.cells.insert(last.cells.end(), first.cells.begin(), first.cells.end());
      segs.erase(segs.begin());
    }
  }
  return segs;
}

std::vector<ScanSegment> segment_scan_3d(const Scan& scan, const ScanConfig& cfg) {
  const int np = scan.n_polar;
  const int na = scan.n_azimuth;
  const double polar_rad = M_PI / np;
  const double az_rad = 2.0 * M_PI / na;
  auto index = [&](int ip, int ia) { return ip * na + ia; };
  std::vector<int> label(static_cast<std::size_t>(np) * na, -1);
  std::vector<ScanSegment> segs;

  for (int ip = 0; ip < np; ++ip) {
    for (int ia = 0; ia < na; ++ia) {
      if (!scan.points[index(ip, ia)].hit || label[index(ip, ia)] >= 0) continue;
      // flood-fill one connected component
      const int id = static_cast<int>(segs.size());
      segs.emplace_back();
      std::vector<std::pair<int, int>> stack{{ip, ia}};
      label[index(ip, ia)] = id;
      while (!stack.empty()) {
        const auto [cp, ca] = stack.back();
        stack.pop_back();
        segs[id].cells.push_back({cp, ca});
        const double rc = scan.points[index(cp, ca)].range;
        const double sin_theta =
            std::max(std::sin(M_PI * cfg.polar_step_deg * cp / 180.0), 0.5 * polar_rad);
        const std::pair<int, int> nbrs[4] = {{cp - 1, ca},
                                             {cp + 1, ca},
                                             {cp, (ca + 1) % na},
                                             {cp, (ca + na - 1) % na}};
        const double steps[4] = {polar_rad, polar_rad, az_rad * sin_theta, az_rad * sin_theta};
        for (int t = 0; t < 4; ++t) {
          const auto [qp, qa] = nbrs[t];
          if (qp < 0 || qp >= np) continue;
          const int qi = index(qp, qa);
          if (!scan.points[qi].hit || label[qi] >= 0) continue;
          if (!gap_ok(rc, scan.points[qi].range, steps[t], cfg.gap_factor)) continue;
          label[qi] = id;
          stack.push_back({qp, qa});
        }
      }
    }
  }
  return segs;
}

}  // namespace

std::vector<ScanSegment> segment_scan(const Scan& scan, const ScanConfig& cfg) {
  return scan.n_polar == 1 ? segment_scan_2d(scan, cfg) : segment_scan_3d(scan, cfg);
}

Reconstruction fit_circle_2d(const std::vector<Vec>& arc, const Vec& origin,
                             double symmetry_tol) {
  Reconstruction rec;
  if (arc.size() < 3) {
    rec.note = "arc has fewer than 3 points";
    return rec;
  }
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < arc.size(); ++i) {
    if ((arc[i] - origin).norm() < (arc[nearest] - origin).norm()) nearest = i;
  }
  const Vec& c_hat = arc[nearest];
  // Grid discretization near the tangent rays can leave one end of the arc a
  // steep cell longer than the other.  Any end-symmetric sub-arc determines
  // the same circle, so trim the longer side instead of rejecting; a truly
  // one-sided truncation (occluded apex) runs out of cells before balancing.
  std::size_t lo = 0;
  std::size_t hi = arc.size() - 1;
  double bp = (arc[lo] - c_hat).norm();
  double bm = (arc[hi] - c_hat).norm();
  while (lo < nearest && hi > nearest &&
         std::abs(bp - bm) > symmetry_tol * std::max(bp, bm)) {
    if (bp > bm) {
      bp = (arc[++lo] - c_hat).norm();
    } else {
      bm = (arc[--hi] - c_hat).norm();
    }
  }
  rec.symmetric = lo < nearest && hi > nearest &&
                  std::abs(bp - bm) <= symmetry_tol * std::max(bp, bm);
  if (!rec.symmetric) {
    rec.note = "asymmetric truncation";
    return rec;
  }
  const double a = 0.5 * (arc[lo] - arc[hi]).norm();
  const double b = 0.5 * (bp + bm);
  const double disc = b * b - a * a;
  if (disc <= 0.0) {
    rec.note = "chord-sagitta identity unsolvable";
    return rec;
  }
  rec.ball.radius = b * b / (2.0 * std::sqrt(disc));
  rec.ball.center = c_hat + rec.ball.radius * (c_hat - origin).normalized();
  rec.ok = true;
  return rec;
}

Reconstruction fit_sphere_3d(const std::vector<Vec>& cap, const std::vector<Vec>& rim,
                             const Vec& origin, double symmetry_tol) {
  Reconstruction rec;
  if (cap.size() < 4 || rim.size() < 3) {
    rec.note = "degenerate spherical cap";
    return rec;
  }
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < cap.size(); ++i) {
    if ((cap[i] - origin).norm() < (cap[nearest] - origin).norm()) nearest = i;
  }
  const Vec c_tilde = cap[nearest];
  const Vec u_hat = (c_tilde - origin).normalized();

  // Base-circle radius and apex chord are both attained on the rim.
  double a = 0.0;
  double b = 0.0;
  Vec base_center = Vec::Zero(3);
  for (const Vec& y : rim) {
    const Vec w = y - origin;
    a = std::max(a, (w - w.dot(u_hat) * u_hat).norm());
    b = std::max(b, (y - c_tilde).norm());
    base_center += y;
  }
  base_center /= static_cast<double>(rim.size());
  if (a <= 0.0) {
    rec.note = "degenerate spherical cap";
    return rec;
  }
  const Vec w = base_center - origin;
  const double off_axis = (w - w.dot(u_hat) * u_hat).norm();
  rec.symmetric = off_axis <= symmetry_tol * a;
  if (!rec.symmetric) {
    rec.note = "asymmetric truncation";
    return rec;
  }
  const double disc = b * b - a * a;
  if (disc <= 0.0) {
    rec.note = "chord-sagitta identity unsolvable";
    return rec;
  }
  rec.ball.radius = b * b / (2.0 * std::sqrt(disc));
  rec.ball.center = c_tilde + rec.ball.radius * u_hat;
  rec.ok = true;
  return rec;
}

Reconstruction reconstruct_segment(const Scan& scan, const ScanSegment& seg,
                                   const ScanConfig& cfg) {
  if (scan.n_polar == 1) {
    std::vector<Vec> arc;
    arc.reserve(seg.cells.size());
    for (const auto& [ip, ia] : seg.cells) arc.push_back(scan.point(ip, ia));
    return fit_circle_2d(arc, scan.origin, cfg.symmetry_tol);
  }

  std::set<std::pair<int, int>> cells(seg.cells.begin(), seg.cells.end());
  std::set<int> rows;
  std::vector<Vec> cap;
  std::vector<Vec> rim;
  cap.reserve(seg.cells.size());
  for (const auto& [ip, ia] : seg.cells) {
    rows.insert(ip);
    cap.push_back(scan.point(ip, ia));
    const std::pair<int, int> nbrs[4] = {{ip - 1, ia},
                                         {ip + 1, ia},
                                         {ip, (ia + 1) % scan.n_azimuth},
                                         {ip, (ia + scan.n_azimuth - 1) % scan.n_azimuth}};
    bool boundary = false;
    for (const auto& nb : nbrs) {
      if (nb.first < 0 || nb.first >= scan.n_polar || cells.count(nb) == 0) {
        boundary = true;
        break;
      }
    }
    if (boundary) rim.push_back(cap.back());
  }
  if (rows.size() < 2) {
    Reconstruction rec;
    rec.note = "cap spans a single polar ring";
    return rec;
  }
  return fit_sphere_3d(cap, rim, scan.origin, cfg.symmetry_tol);
}

DetectionResult detect_obstacles(const Workspace& ws, const Vec& x, const ScanConfig& cfg) {
  const Scan scan = scan_environment(ws, x, cfg);
  DetectionResult out;
  for (const ScanSegment& seg : segment_scan(scan, cfg)) {
    ++out.segments_total;
    Reconstruction rec = reconstruct_segment(scan, seg, cfg);
    if (!rec.ok || !rec.symmetric) {
      ++out.segments_dropped;
      continue;
    }
    Ball ball = rec.ball;
    ball.radius += cfg.margin;
    out.obstacles.push_back(std::move(ball));
  }
  return out;
}

void ObstacleTracker::update(const std::vector<Ball>& detections, int frozen_id) {
  for (Track& tr : tracks_) tr.visible = false;
  for (const Ball& det : detections) {
    int best = -1;
    double best_dist = kInf;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      const double d = (tracks_[i].ball.center - det.center).norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0 && best_dist <= 0.5 * tracks_[best].ball.radius) {
      Track& tr = tracks_[best];
      tr.visible = true;
      if (tr.id != frozen_id) tr.ball = det;  // the active obstacle keeps its estimate
    } else {
      Track tr;
      tr.id = next_id_++;
      tr.ball = det;
      tr.visible = true;
      tracks_.push_back(std::move(tr));
    }
  }
  if (frozen_id >= 0) {
    for (Track& tr : tracks_) {
      if (tr.id == frozen_id) tr.visible = true;
    }
  }
}

std::vector<ObstacleTracker::Track> ObstacleTracker::visible() const {
  std::vector<Track> out;
  for (const Track& tr : tracks_) {
    if (tr.visible) out.push_back(tr);
  }
  return out;
}

}  // namespace hybridnav
