#pragma once

// Upstream artifacts: per-frame point maps, depth maps and tracked object
// masks described by a JSON manifest, plus metric rescaling of the
// reconstruction.

#include "vipscene/geom.hpp"
#include "vipscene/mask.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vipscene {

/// One sampled view. Pixel (r, c) of the point map is column r·W + c.
struct Frame {
  std::string frame_id;
  PointCloud point_map;
  Grid<std::uint8_t> valid_mask;
  Grid<double> mono_depth;
  Grid<double> recon_depth;

  Eigen::Index height() const { return valid_mask.rows(); }
  Eigen::Index width() const { return valid_mask.cols(); }
  bool valid(Eigen::Index r, Eigen::Index c) const { return valid_mask(r, c) != 0; }
};

struct Track {
  std::string category;
  std::map<std::string, BinaryMask> masks; ///< frame_id → mask
};

struct FrameSet {
  std::vector<Frame> frames;
  std::map<std::string, Track> tracks; ///< object_id → track
  std::map<std::string, BinaryMask> floor_masks;
  double fps = 2.0;
  std::string units;
  std::optional<Polygon2Dd> room;
  std::string description;

  Eigen::Index height() const { return frames.empty() ? 0 : frames.front().height(); }
  Eigen::Index width() const { return frames.empty() ? 0 : frames.front().width(); }
  const Frame* find_frame(const std::string& frame_id) const;
};

// --- manifest -----------------------------------------------------------------

struct FrameEntry {
  std::string frame_id;
  std::string point_map, valid_mask, mono_depth, recon_depth; ///< paths relative to the manifest
};

struct TrackEntry {
  std::string category;
  std::map<std::string, std::string> masks; ///< frame_id → path
};

struct Manifest {
  int schema_version = 1;
  std::string units = "reconstruction";
  double fps = 2.0;
  std::vector<FrameEntry> frames;
  std::map<std::string, TrackEntry> tracks;
  std::map<std::string, std::string> floor_masks;
  std::optional<std::vector<Vec2<double>>> room_polygon;
  std::string description;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Loads every tensor referenced by the manifest.
/// Errors: MissingFile, ShapeMismatch, DanglingTrackRef, InvalidManifest.
FrameSet load_frameset(const std::filesystem::path& manifest_path);

// --- metric rescaling -----------------------------------------------------------

inline constexpr double kMinReconDepth = 1e-4;

/// Median of mono_depth / recon_depth pooled over all valid pixels of all
/// frames (recon_depth ≤ 1e-4 m excluded). Throws NoValidPixels.
double estimate_scene_scale(const FrameSet& frames);

/// Multiplies point maps and reconstruction depths by `scale`.
FrameSet rescale_frameset(const FrameSet& frames, double scale);

} // namespace vipscene
