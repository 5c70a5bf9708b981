#include "vipscene/decompose.hpp"

#include <cmath>
#include <vector>

namespace vipscene {

int erosion_radius(const BinaryMask& mask, const ErosionConfig& cfg) {
  if (mask.area() == 0) return 0;
  const long r = std::lround(cfg.alpha * std::sqrt(static_cast<double>(mask.area())));
  return static_cast<int>(std::clamp<long>(r, cfg.r_min, cfg.r_max));
}

BinaryMask erode_mask(const BinaryMask& mask, int radius) {
  if (radius <= 0 || mask.empty()) return mask;
  const Eigen::Index h = mask.height(), w = mask.width();

  // Row-wise prefix counts turn each disc row into one range query, so the
  // cost is O(H·W·r) rather than O(H·W·r²).
  Grid<int> prefix = Grid<int>::Zero(h, w + 1);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) prefix(r, c + 1) = prefix(r, c) + (mask.at(r, c) ? 1 : 0);

  std::vector<Eigen::Index> half_width(static_cast<std::size_t>(radius) + 1);
  for (int dy = 0; dy <= radius; ++dy)
    half_width[static_cast<std::size_t>(dy)] =
        static_cast<Eigen::Index>(std::floor(std::sqrt(double(radius) * radius - double(dy) * dy)));

  Grid<std::uint8_t> out = Grid<std::uint8_t>::Zero(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    if (r < radius || r + radius >= h) continue; // vertical disc extent leaves the image
    for (Eigen::Index c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        const Eigen::Index hw = half_width[static_cast<std::size_t>(std::abs(dy))];
        const Eigen::Index c0 = c - hw, c1 = c + hw;
        if (c0 < 0 || c1 >= w) {
          keep = false;
          break;
        }
        const Eigen::Index row = r + dy;
        keep = prefix(row, c1 + 1) - prefix(row, c0) == c1 - c0 + 1;
      }
      if (keep) out(r, c) = BinaryMask::kOn;
    }
  }
  return BinaryMask(std::move(out));
}

PointCloud gather_masked_points(const FrameSet& frames, const std::map<std::string, BinaryMask>& masks,
                                Erosion erosion, const ErosionConfig& cfg) {
  std::vector<Eigen::Index> columns;
  std::vector<const Frame*> owners;
  for (const auto& frame : frames.frames) {
    const auto it = masks.find(frame.frame_id);
    if (it == masks.end()) continue;
    const BinaryMask m = erosion == Erosion::On ? erode_mask(it->second, erosion_radius(it->second, cfg)) : it->second;
    for (Eigen::Index r = 0; r < m.height(); ++r)
      for (Eigen::Index c = 0; c < m.width(); ++c)
        if (m.at(r, c) && frame.valid(r, c)) {
          columns.push_back(r * frame.width() + c);
          owners.push_back(&frame);
        }
  }
  PointCloud cloud(3, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i)
    cloud.col(static_cast<Eigen::Index>(i)) = owners[i]->point_map.col(columns[i]);
  return cloud;
}

ObjectInstance extract_object_cloud(const FrameSet& frames, const std::string& object_id, Erosion erosion,
                                    const ErosionConfig& cfg) {
  const auto it = frames.tracks.find(object_id);
  if (it == frames.tracks.end()) throw Error(ErrorCode::UnknownObject, object_id);

  ObjectInstance obj;
  obj.object_id = object_id;
  obj.category = it->second.category;
  obj.cloud = gather_masked_points(frames, it->second.masks, erosion, cfg);
  if (obj.cloud.cols() == 0)
    throw Error(ErrorCode::EmptyAfterErosion, object_id + ": no points survive masking");
  return obj;
}

} // namespace vipscene
