#pragma once

#include "vipscene/geom.hpp"
#include "vipscene/ingest.hpp"
#include "vipscene/mask.hpp"

#include <optional>
#include <string>

namespace vipscene {

/// Gravity-aligned box: center and size in the aligned frame, yaw about +Y.
struct OrientedBox {
  Vec3<double> center = Vec3<double>::Zero();
  Vec3<double> size = Vec3<double>::Ones(); ///< extents along the box's local x, y (up), z
  double theta = 0;                         ///< [0, π)
};

struct ObjectInstance {
  std::string object_id;
  std::string category;
  PointCloud cloud;
  std::optional<double> theta;
  std::optional<OrientedBox> obb;
};

/// Radius grows with linear object extent: clamp(round(alpha·√area), r_min, r_max).
struct ErosionConfig {
  double alpha = 0.02;
  int r_min = 1;
  int r_max = 15;
};

int erosion_radius(const BinaryMask& mask, const ErosionConfig& cfg = {});

/// Erosion by a disc of the given radius: a pixel survives iff every pixel
/// within Euclidean distance ≤ radius is foreground. Pixels outside the image
/// count as background.
BinaryMask erode_mask(const BinaryMask& mask, int radius);

enum class Erosion { Off, On };

/// Gathers point-map entries under the (optionally eroded) track masks of
/// `object_id` across all frames, skipping invalid pixels.
/// Errors: UnknownObject, EmptyAfterErosion.
ObjectInstance extract_object_cloud(const FrameSet& frames, const std::string& object_id, Erosion erosion,
                                    const ErosionConfig& cfg = {});

/// Same gather for an arbitrary per-frame mask set (used for the floor).
PointCloud gather_masked_points(const FrameSet& frames, const std::map<std::string, BinaryMask>& masks,
                                Erosion erosion, const ErosionConfig& cfg = {});

} // namespace vipscene
