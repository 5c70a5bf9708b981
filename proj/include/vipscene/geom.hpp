#pragma once

// Geometry primitives shared by every pipeline stage: rigid transforms,
// total-least-squares plane fitting, gravity alignment, 2D PCA and convex
// polygon clipping. Everything here is a pure function over Eigen types.

#include "vipscene/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace vipscene {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
/// 3×N point block, one point per column.
template <typename Scalar> using Points3 = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
template <typename Scalar> using Points2 = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

/// Right-handed rotation about +Y. Maps +Z to (sin a, 0, cos a).
template <typename Scalar> Mat3<Scalar> yaw_rotation(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitY()).toRotationMatrix();
}

/// Yaw of a rotation about +Y, in [0, 2π).
template <typename Scalar> Scalar yaw_of(const Mat3<Scalar>& rotation) {
  const Vec3<Scalar> front = rotation * Vec3<Scalar>::UnitZ();
  Scalar yaw = std::atan2(front.x(), front.z());
  if (yaw < 0) yaw += 2 * std::numbers::pi_v<Scalar>;
  if (yaw >= 2 * std::numbers::pi_v<Scalar>) yaw -= 2 * std::numbers::pi_v<Scalar>;
  return yaw;
}

// ---------------------------------------------------------------------------
// RigidTransform
// ---------------------------------------------------------------------------

/// x ↦ rotation·x + translation, rotation ∈ SO(3).
template <typename Scalar> struct RigidTransform {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  static RigidTransform identity() { return {}; }

  Vec3<Scalar> apply(const Vec3<Scalar>& p) const { return rotation * p + translation; }

  Points3<Scalar> apply(const Points3<Scalar>& pts) const {
    return (rotation * pts).colwise() + translation;
  }

  /// (this ∘ other)(x) = this(other(x))
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    const Mat3<Scalar> rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// max(|det R − 1|, ‖RᵀR − I‖∞)
  Scalar orthogonality_error() const {
    const Scalar det_err = std::abs(rotation.determinant() - Scalar(1));
    const Scalar ortho_err =
        (rotation.transpose() * rotation - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    return std::max(det_err, ortho_err);
  }

  bool is_valid(Scalar tol = Scalar(1e-6)) const { return orthogonality_error() <= tol; }
};

// ---------------------------------------------------------------------------
// Plane
// ---------------------------------------------------------------------------

/// {x : normal·x = offset}, ‖normal‖ = 1.
template <typename Scalar> struct Plane {
  Vec3<Scalar> normal = Vec3<Scalar>::UnitY();
  Scalar offset = 0;

  Scalar signed_distance(const Vec3<Scalar>& p) const { return normal.dot(p) - offset; }
};

namespace detail {

// Sign convention used when no reference cloud decides: the component of
// largest magnitude is made positive (lowest index wins exact ties).
template <typename Scalar> Vec3<Scalar> canonical_sign(const Vec3<Scalar>& n) {
  Eigen::Index idx = 0;
  n.cwiseAbs().maxCoeff(&idx);
  return n(idx) < 0 ? Vec3<Scalar>(-n) : n;
}

} // namespace detail

/// Total-least-squares plane through `points` (smallest principal direction of
/// the centered covariance). When `reference` is given, the normal is oriented
/// so that a strict majority of reference points lies on the positive side;
/// otherwise the largest-magnitude normal component is made positive.
template <typename Scalar>
Plane<Scalar> fit_plane_lsq(const Points3<Scalar>& points,
                            const Points3<Scalar>* reference = nullptr) {
  if (points.cols() < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points");
  const Vec3<Scalar> centroid = points.rowwise().mean();
  const Points3<Scalar> centered = points.colwise() - centroid;
  const Mat3<Scalar> cov = centered * centered.transpose() / Scalar(points.cols());

  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> eig(cov);
  const Vec3<Scalar> evals = eig.eigenvalues(); // ascending
  const Scalar largest = evals(2);
  if (!(largest > Scalar(0)) || evals(1) <= largest * Scalar(1e-12))
    throw Error(ErrorCode::DegenerateInput, "points are collinear or coincident");

  Vec3<Scalar> normal = detail::canonical_sign<Scalar>(eig.eigenvectors().col(0).normalized());
  Scalar offset = normal.dot(centroid);

  if (reference != nullptr) {
    Eigen::Index above = 0, below = 0;
    for (Eigen::Index i = 0; i < reference->cols(); ++i) {
      const Scalar d = normal.dot(reference->col(i)) - offset;
      if (d > 0) ++above;
      else if (d < 0) ++below;
    }
    if (below > above) {
      normal = -normal;
      offset = -offset;
    }
  }
  return {normal, offset};
}

/// Pure rotation taking plane.normal onto +Y by the minimal angle
/// (axis normal × ŷ). An antiparallel normal rotates 180° about X.
template <typename Scalar> RigidTransform<Scalar> gravity_align(const Plane<Scalar>& plane) {
  const Vec3<Scalar> n = plane.normal.normalized();
  const Vec3<Scalar> up = Vec3<Scalar>::UnitY();
  RigidTransform<Scalar> t;
  const Scalar c = n.dot(up);
  const Vec3<Scalar> axis = n.cross(up);
  const Scalar s = axis.norm();
  if (s < Scalar(1e-15)) {
    if (c < 0)
      t.rotation = Eigen::AngleAxis<Scalar>(std::numbers::pi_v<Scalar>, Vec3<Scalar>::UnitX())
                       .toRotationMatrix();
    return t;
  }
  t.rotation = Eigen::AngleAxis<Scalar>(std::atan2(s, c), axis / s).toRotationMatrix();
  return t;
}

// ---------------------------------------------------------------------------
// 2D PCA
// ---------------------------------------------------------------------------

template <typename Scalar> struct PcaAxes2D {
  Scalar angle;             ///< major-axis direction, [0, π)
  Vec2<Scalar> eigenvalues; ///< descending
};

/// Principal axes of a 2D point set. The 0/π ambiguity is folded into [0, π);
/// an isotropic covariance returns angle 0.
template <typename Scalar> PcaAxes2D<Scalar> pca_axes_2d(const Points2<Scalar>& pts) {
  if (pts.cols() < 2) throw Error(ErrorCode::DegenerateInput, "PCA needs at least 2 points");
  const Vec2<Scalar> mean = pts.rowwise().mean();
  const Points2<Scalar> centered = pts.colwise() - mean;
  if (centered.cwiseAbs().maxCoeff() <= Scalar(1e-12))
    throw Error(ErrorCode::DegenerateInput, "all points coincide");

  const Scalar n = Scalar(pts.cols());
  const Scalar cxx = centered.row(0).squaredNorm() / n;
  const Scalar cyy = centered.row(1).squaredNorm() / n;
  const Scalar cxy = centered.row(0).dot(centered.row(1)) / n;

  const Scalar half_diff = (cxx - cyy) / 2;
  const Scalar radius = std::hypot(half_diff, cxy);
  const Scalar mid = (cxx + cyy) / 2;
  PcaAxes2D<Scalar> out;
  out.eigenvalues = Vec2<Scalar>(mid + radius, std::max(Scalar(0), mid - radius));

  if (radius <= (cxx + cyy) * Scalar(1e-12)) {
    out.angle = 0;
    return out;
  }
  Scalar angle = std::atan2(cxy, half_diff) / 2;
  if (angle < 0) angle += std::numbers::pi_v<Scalar>;
  if (angle >= std::numbers::pi_v<Scalar>) angle -= std::numbers::pi_v<Scalar>;
  out.angle = angle;
  return out;
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

template <typename Scalar> Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <typename Scalar> Scalar signed_area(const std::vector<Vec2<Scalar>>& v) {
  Scalar acc = 0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross2<Scalar>(v[i], v[(i + 1) % n]);
  return acc / 2;
}

/// Simple polygon, counter-clockwise. Fewer than three distinct vertices
/// collapse to the empty polygon.
template <typename Scalar> class Polygon2D {
public:
  static constexpr Scalar kMinEdge = Scalar(1e-9);

  Polygon2D() = default;

  explicit Polygon2D(std::vector<Vec2<Scalar>> vertices) {
    std::vector<Vec2<Scalar>> clean;
    clean.reserve(vertices.size());
    for (const auto& p : vertices)
      if (clean.empty() || (p - clean.back()).norm() >= kMinEdge) clean.push_back(p);
    while (clean.size() > 1 && (clean.front() - clean.back()).norm() < kMinEdge) clean.pop_back();
    if (clean.size() < 3) return;
    if (signed_area<Scalar>(clean) < 0) std::reverse(clean.begin(), clean.end());
    vertices_ = std::move(clean);
  }

  const std::vector<Vec2<Scalar>>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }

  /// True if no vertex turns clockwise beyond `tol` (relative to edge lengths).
  bool is_convex(Scalar tol = Scalar(1e-12)) const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2<Scalar> e0 = vertices_[(i + 1) % n] - vertices_[i];
      const Vec2<Scalar> e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
      if (cross2<Scalar>(e0, e1) < -tol * e0.norm() * e1.norm()) return false;
    }
    return true;
  }

  bool contains(const Vec2<Scalar>& p) const {
    if (vertices_.empty()) return false;
    // convex CCW: inside iff left of (or on) every edge
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
      if (cross2<Scalar>(vertices_[(i + 1) % n] - vertices_[i], p - vertices_[i]) < 0) return false;
    return true;
  }

  Vec2<Scalar> centroid() const {
    Vec2<Scalar> c = Vec2<Scalar>::Zero();
    Scalar a = 0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar w = cross2<Scalar>(vertices_[i], vertices_[(i + 1) % n]);
      c += (vertices_[i] + vertices_[(i + 1) % n]) * w;
      a += w;
    }
    return a == 0 ? c : Vec2<Scalar>(c / (3 * a));
  }

  /// Axis-aligned bounds as (min, max).
  std::pair<Vec2<Scalar>, Vec2<Scalar>> bounds() const {
    Vec2<Scalar> lo = Vec2<Scalar>::Constant(std::numeric_limits<Scalar>::infinity());
    Vec2<Scalar> hi = -lo;
    for (const auto& v : vertices_) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return {lo, hi};
  }

private:
  std::vector<Vec2<Scalar>> vertices_;
};

/// Shoelace area; empty → 0.
template <typename Scalar> Scalar polygon_area(const Polygon2D<Scalar>& poly) {
  return std::max(Scalar(0), signed_area<Scalar>(poly.vertices()));
}

/// Sutherland–Hodgman intersection of a convex subject with a convex clip
/// polygon. Throws NonConvexInput if `clip` has a reflex vertex.
template <typename Scalar>
Polygon2D<Scalar> convex_clip(const Polygon2D<Scalar>& subject, const Polygon2D<Scalar>& clip) {
  if (!clip.is_convex()) throw Error(ErrorCode::NonConvexInput, "clip polygon has a reflex vertex");
  if (subject.empty() || clip.empty()) return {};

  std::vector<Vec2<Scalar>> output = subject.vertices();
  std::vector<Vec2<Scalar>> input;
  const auto& cv = clip.vertices();
  const std::size_t m = cv.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2<Scalar>& a = cv[e];
    const Vec2<Scalar>& b = cv[(e + 1) % m];
    const Vec2<Scalar> edge = b - a;
    auto side = [&](const Vec2<Scalar>& p) { return cross2<Scalar>(edge, p - a); };

    input.swap(output);
    output.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2<Scalar>& cur = input[i];
      const Vec2<Scalar>& prev = input[(i + n - 1) % n];
      const Scalar sc = side(cur);
      const Scalar sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        output.push_back(cur);
      } else if (sp >= 0) {
        output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return Polygon2D<Scalar>(std::move(output));
}

/// Euclidean distance between two convex polygons; 0 when they touch or overlap.
template <typename Scalar>
Scalar polygon_distance(const Polygon2D<Scalar>& a, const Polygon2D<Scalar>& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<Scalar>::infinity();
  for (const auto& v : a.vertices())
    if (b.contains(v)) return 0;
  for (const auto& v : b.vertices())
    if (a.contains(v)) return 0;

  auto point_segment = [](const Vec2<Scalar>& p, const Vec2<Scalar>& s0, const Vec2<Scalar>& s1) {
    const Vec2<Scalar> d = s1 - s0;
    const Scalar len2 = d.squaredNorm();
    const Scalar t = len2 > 0 ? std::clamp((p - s0).dot(d) / len2, Scalar(0), Scalar(1)) : Scalar(0);
    return (s0 + d * t - p).norm();
  };
  auto segments_cross = [](const Vec2<Scalar>& p0, const Vec2<Scalar>& p1, const Vec2<Scalar>& q0,
                           const Vec2<Scalar>& q1) {
    const Scalar d1 = cross2<Scalar>(p1 - p0, q0 - p0), d2 = cross2<Scalar>(p1 - p0, q1 - p0);
    const Scalar d3 = cross2<Scalar>(q1 - q0, p0 - q0), d4 = cross2<Scalar>(q1 - q0, p1 - q0);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
  };

  Scalar best = std::numeric_limits<Scalar>::infinity();
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const auto& a0 = va[i];
    const auto& a1 = va[(i + 1) % va.size()];
    for (std::size_t j = 0; j < vb.size(); ++j) {
      const auto& b0 = vb[j];
      const auto& b1 = vb[(j + 1) % vb.size()];
      if (segments_cross(a0, a1, b0, b1)) return 0;
      best = std::min({best, point_segment(a0, b0, b1), point_segment(b0, a0, a1)});
    }
  }
  return best;
}

using RigidTransformd = RigidTransform<double>;
using Planed = Plane<double>;
using Polygon2Dd = Polygon2D<double>;
using PointCloud = Points3<double>;

} // namespace vipscene
