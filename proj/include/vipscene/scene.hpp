#pragma once

// Final scene model, its JSON form, and the box-proxy renderers used by the
// evaluation harness.

#include "vipscene/geom.hpp"
#include "vipscene/image.hpp"
#include "vipscene/refine.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vipscene {

struct SceneObject {
  std::string object_id;
  std::string category;
  std::optional<std::string> asset_id;
  Vec3<double> size = Vec3<double>::Ones();         ///< w, h, d
  Vec3<double> position = Vec3<double>::Zero();     ///< box center
  double theta = 0;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneDocument {
  int schema_version = 1;
  std::string description;
  std::optional<std::vector<Vec2<double>>> room;
  std::vector<SceneObject> objects; ///< sorted by object_id

  friend bool operator==(const SceneDocument&, const SceneDocument&) = default;
};

nlohmann::json to_json(const SceneDocument& doc);
SceneDocument scene_from_json(const nlohmann::json& j);

/// Canonical text form: identical documents give identical bytes.
std::string serialize_scene(const SceneDocument& doc);
SceneDocument parse_scene(const std::string& text);
SceneDocument read_scene(const std::filesystem::path& path);
void write_scene(const std::filesystem::path& path, const SceneDocument& doc);

/// Objects whose measured bottom sits more than this above the floor keep
/// their measured height; everything else rests on the floor.
inline constexpr double kMountingThreshold = 0.5;

/// Builds the document from a refined layout. `assignments` maps every
/// object_id to its asset (nullopt for unmatched objects).
SceneDocument export_scene(const SceneLayout& layout,
                           const std::map<std::string, std::optional<std::string>>& assignments,
                           const std::string& description = {});

// --- rendering ---------------------------------------------------------------------

inline constexpr Rgb kBackground{240, 240, 240};

/// FNV-1a (32-bit) of the category bytes; RGB = the three low-order bytes.
std::uint32_t fnv1a(const std::string& text);
Rgb category_color(const std::string& category);

struct CameraPose {
  Vec3<double> eye = Vec3<double>::Zero();
  double yaw = 0;   ///< 0 looks along +Z, positive turns toward +X
  double pitch = 0; ///< positive looks up
  double fov = 1.2; ///< horizontal field of view, (0, π)
  int width = 256;
  int height = 256;
};

/// Orthographic view from above (x to the right, z downward), fitted to the
/// room or to the object footprints plus a 10% margin.
RasterImage render_topdown(const SceneDocument& doc, int width, int height);

/// Pinhole view of flat-shaded box proxies, painter-sorted, no depth buffer.
RasterImage render_fpv(const SceneDocument& doc, const CameraPose& pose);

} // namespace vipscene
