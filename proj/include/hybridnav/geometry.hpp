#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridnav {

using Vec = Eigen::VectorXd;

/// Absolute tolerance applied to every set-membership comparison.  A single
/// knob keeps flow/jump decisions deterministic under floating point; closed
/// sets are realised by widening the non-strict relations by this amount.
inline constexpr double kSetTol = 1e-9;

/// Relative tolerance for membership in the cone-parallel direction set.
inline constexpr double kParallelTol = 1e-7;

/// Comparison relation used by cone and half-space predicates.
enum class Rel { Lt, Le, Eq, Ge, Gt };

/// Evaluates `lhs rel rhs` with absolute slack `tol`.  Le/Ge are widened and
/// Lt/Gt narrowed so that for fixed operands exactly one of Lt, Eq, Gt holds.
inline bool compare(double lhs, Rel rel, double rhs, double tol = kSetTol) {
  const double diff = lhs - rhs;  // single rounding point keeps trichotomy exact
  switch (rel) {
    case Rel::Lt: return diff < -tol;
    case Rel::Le: return diff <= tol;
    case Rel::Eq: return std::abs(diff) <= tol;
    case Rel::Ge: return diff >= -tol;
    case Rel::Gt: return diff > tol;
  }
  return false;
}

/// Angle between two nonzero vectors, in [0, pi].
template <typename DA, typename DB>
double angle_between(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::domain_error("angle_between: zero vector");
  }
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

/// Householder reflection of `x` about the hyperplane orthogonal to the unit
/// vector `v`:  x - 2 (v.x) v.
template <typename DV, typename DX>
Vec reflect(const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DX>& x) {
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw std::domain_error("reflect: mirror direction must be unit length");
  }
  return x - 2.0 * v.dot(x) * v;
}

/// Cone of vertex `vertex`, axis `axis` (nonzero, not necessarily unit) and
/// half-aperture `aperture` in (0, pi/2].  A point q is compared through
///   |axis| |q - vertex| cos(aperture)  rel  axis.(q - vertex).
struct ConeSpec {
  Vec vertex;
  Vec axis;
  double aperture = 0.0;

  ConeSpec(Vec vertex_, Vec axis_, double aperture_)
      : vertex(std::move(vertex_)), axis(std::move(axis_)), aperture(aperture_) {
    if (axis.norm() == 0.0) throw std::invalid_argument("ConeSpec: zero axis");
    if (!(aperture > 0.0 && aperture <= M_PI / 2.0 + 1e-12)) {
      throw std::invalid_argument("ConeSpec: aperture outside (0, pi/2]");
    }
  }
};

/// Membership of q in the cone under relation `rel`.  The vertex itself
/// satisfies the Le/Eq/Ge relations and fails the strict ones.
template <typename D>
bool in_cone(const Eigen::MatrixBase<D>& q, const ConeSpec& cone, Rel rel,
             double tol = kSetTol) {
  const Vec d = q - cone.vertex;
  const double lhs = cone.axis.norm() * d.norm() * std::cos(cone.aperture);
  const double rhs = cone.axis.dot(d);
  return compare(lhs, rel, rhs, tol);
}

/// Half-space through `anchor` with normal `normal` under relation `rel`:
///   normal.(q - anchor) rel 0.
struct HalfSpaceSpec {
  Vec anchor;
  Vec normal;
  Rel rel = Rel::Ge;

  HalfSpaceSpec(Vec anchor_, Vec normal_, Rel rel_)
      : anchor(std::move(anchor_)), normal(std::move(normal_)), rel(rel_) {
    if (normal.norm() == 0.0) throw std::invalid_argument("HalfSpaceSpec: zero normal");
  }
};

template <typename D>
bool in_halfspace(const Eigen::MatrixBase<D>& q, const HalfSpaceSpec& h,
                  double tol = kSetTol) {
  return compare(h.normal.dot(q - h.anchor), h.rel, 0.0, tol);
}

/// Membership of w in the set of directions making angle `phi` with `v`
/// (the lateral directions of a cone), with relative tolerance.  The zero
/// vector belongs to the set for every phi.
template <typename DW, typename DV>
bool in_parallel_set(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DV>& v,
                     double phi, double tol = kParallelTol) {
  const double scale = w.norm() * v.norm();
  return std::abs(w.dot(v) - scale * std::cos(phi)) <= tol * scale;
}

/// Distance from q to the closed segment [a, b].
template <typename DQ, typename DA, typename DB>
double segment_distance(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DA>& a,
                        const Eigen::MatrixBase<DB>& b) {
  const Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (q - a).norm();
  const double lam = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + lam * ab)).norm();
}

/// Whether the closed segment [a, b] meets the closed ball of given center
/// and radius.  Tangency counts as a hit.
template <typename DA, typename DB, typename DC>
bool segment_hits_ball(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                       const Eigen::MatrixBase<DC>& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("segment_hits_ball: radius <= 0");
  return segment_distance(center, a, b) <= radius;
}

/// Distance from q to the infinite line through a and b.
template <typename DQ, typename DA, typename DB>
double line_distance(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DA>& a,
                     const Eigen::MatrixBase<DB>& b) {
  const Vec d = b - a;
  const double len = d.norm();
  if (len == 0.0) throw std::domain_error("line_distance: coincident points");
  const Vec r = q - a;
  return (r - (r.dot(d) / (len * len)) * d).norm();
}

/// Two-dimensional affine plane in R^n spanned by two non-colinear
/// directions.  The spanning pair is orthonormalised at construction so
/// projection and distance are a pair of dot products.
class PlaneSpan {
 public:
  PlaneSpan(Vec base, const Vec& u1, const Vec& u2) : base_(std::move(base)) {
    const double ang = angle_between(u1, u2);
    if (ang <= 1e-9 || ang >= M_PI - 1e-9) {
      throw std::domain_error("PlaneSpan: spanning directions are colinear");
    }
    e1_ = u1.normalized();
    Vec w = u2 - u2.dot(e1_) * e1_;
    e2_ = w.normalized();
  }

  /// Plane through three points (q1 and q2 must not be colinear with base).
  static PlaneSpan through(const Vec& base, const Vec& q1, const Vec& q2) {
    return PlaneSpan(base, q1 - base, q2 - base);
  }

  Vec project(const Vec& q) const {
    const Vec d = q - base_;
    return base_ + d.dot(e1_) * e1_ + d.dot(e2_) * e2_;
  }

  double distance(const Vec& q) const { return (q - project(q)).norm(); }

  const Vec& base() const { return base_; }
  const Vec& e1() const { return e1_; }
  const Vec& e2() const { return e2_; }

 private:
  Vec base_;
  Vec e1_;
  Vec e2_;
};

}  // namespace hybridnav
