#include "vipscene/orient.hpp"

#include "vipscene/log.hpp"

#include <algorithm>
#include <numbers>
#include <vector>

namespace vipscene {

namespace {

// Linear-interpolated quantile of an already sorted sequence.
double sorted_quantile(const std::vector<double>& v, double q) {
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - double(lo));
}

} // namespace

double estimate_orientation(const PointCloud& cloud, const Planed& ground) {
  if (cloud.cols() < 3) throw Error(ErrorCode::DegenerateInput, "orientation needs at least 3 points");
  const PointCloud aligned = gravity_align(ground).rotation * cloud;
  // (x, −z) makes a right-handed yaw about +Y a counter-clockwise 2D rotation.
  Points2<double> plan(2, aligned.cols());
  plan.row(0) = aligned.row(0);
  plan.row(1) = -aligned.row(2);
  return pca_axes_2d(plan).angle;
}

OrientedBox fit_obb(const PointCloud& cloud, double theta, const Planed& ground, const ObbConfig& cfg) {
  if (cloud.cols() == 0) throw Error(ErrorCode::DegenerateInput, "empty cloud");
  const Mat3<double> box_rot = yaw_rotation(theta);
  const PointCloud local = box_rot.transpose() * (gravity_align(ground).rotation * cloud);

  OrientedBox box;
  box.theta = theta;
  Vec3<double> mid;
  std::vector<double> coords(static_cast<std::size_t>(local.cols()));
  for (int axis = 0; axis < 3; ++axis) {
    for (Eigen::Index i = 0; i < local.cols(); ++i) coords[static_cast<std::size_t>(i)] = local(axis, i);
    std::sort(coords.begin(), coords.end());
    const double lo = sorted_quantile(coords, cfg.trim_fraction);
    const double hi = sorted_quantile(coords, 1.0 - cfg.trim_fraction);
    double extent = hi - lo;
    if (extent < cfg.min_extent) {
      log_event("obb_extent_floored", {{"axis", axis}, {"extent", extent}, {"floor", cfg.min_extent}});
      extent = cfg.min_extent;
    }
    box.size(axis) = extent;
    mid(axis) = lo + (hi - lo) / 2;
  }
  box.center = box_rot * mid;
  return box;
}

RigidTransformd flip_about_vertical(const RigidTransformd& pose) {
  RigidTransformd half_turn;
  half_turn.rotation = yaw_rotation(std::numbers::pi);
  return pose.compose(half_turn);
}

PosePair pose_pair(const OrientedBox& box) {
  RigidTransformd primary;
  primary.rotation = yaw_rotation(box.theta);
  primary.translation = box.center;
  return {primary, flip_about_vertical(primary)};
}

void orient_instance(ObjectInstance& object, const Planed& ground, const ObbConfig& cfg) {
  const double theta = estimate_orientation(object.cloud, ground);
  object.theta = theta;
  object.obb = fit_obb(object.cloud, theta, ground, cfg);
}

} // namespace vipscene
