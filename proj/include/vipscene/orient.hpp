#pragma once

#include "vipscene/decompose.hpp"
#include "vipscene/geom.hpp"

namespace vipscene {

/// Yaw of the cloud's major horizontal axis, [0, π). The cloud is rotated by
/// gravity_align(ground) and projected onto the horizontal plane first; the
/// angle is measured so that a yaw rotation by φ shifts it by φ (mod π).
double estimate_orientation(const PointCloud& cloud, const Planed& ground);

struct ObbConfig {
  double trim_fraction = 0.01; ///< per side, per axis
  double min_extent = 1e-3;    ///< flat clouds are floored to this extent
};

/// Box aligned with gravity and `theta`. Extents are the [trim, 1 − trim]
/// quantile ranges of the points in the box frame; the center is expressed in
/// the gravity-aligned frame.
OrientedBox fit_obb(const PointCloud& cloud, double theta, const Planed& ground, const ObbConfig& cfg = {});

/// The two poses a PCA yaw cannot tell apart.
struct PosePair {
  RigidTransformd primary;
  RigidTransformd flipped;
};

/// Composes a pose with a half turn about its own vertical axis.
RigidTransformd flip_about_vertical(const RigidTransformd& pose);

PosePair pose_pair(const OrientedBox& box);

/// Fills `theta` and `obb` of an extracted instance.
void orient_instance(ObjectInstance& object, const Planed& ground, const ObbConfig& cfg = {});

} // namespace vipscene
