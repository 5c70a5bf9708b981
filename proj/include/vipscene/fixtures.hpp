#pragma once

// Seeded synthetic inputs with known answers: an asset catalog, ray-cast
// framesets of furnished rooms, a single-object halo frameset, and colliding
// layouts. Every writer also emits ground_truth.json next to its output.

#include "vipscene/refine.hpp"
#include "vipscene/retrieve.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vipscene {

/// Canonical-pose solid: AABB centered at the origin, up +Y, front +Z.
/// LShape is a full-width back bar with a leg reaching forward on the +X side;
/// Cylinder is an upright elliptic cylinder.
struct AssetShape {
  enum class Kind { Box, LShape, Cylinder };
  Kind kind = Kind::Box;
  Vec3<double> size = Vec3<double>::Ones();
};

std::string to_string(AssetShape::Kind kind);

struct CatalogEntry {
  std::string asset_id;
  std::string category;
  AssetShape shape;
};

/// Ten categories with two assets each; every footprint is at least 1.2×
/// wider than deep.
std::vector<CatalogEntry> catalog_spec(std::uint64_t seed);

/// Surface samples (float precision) whose AABB is exactly the shape's box.
PointCloud sample_asset_surface(const AssetShape& shape, int n_points, std::uint64_t seed);

AssetCatalog make_catalog(std::uint64_t seed);
nlohmann::json write_catalog_fixture(const std::filesystem::path& out_dir, std::uint64_t seed);

struct RoomFixtureOptions {
  std::uint64_t seed = 0;
  double scale = 2.5;            ///< metric = reconstruction × scale
  double outlier_fraction = 0;   ///< share of valid pixels given a random mono depth
  double tilt = 0.07;            ///< radians about X between the metric and reconstruction frames
  double noise = 0.003;          ///< point noise σ in meters
  int halo_px = 1;               ///< masks are dilated by this disc radius
  int width = 64;
  int height = 64;
  int n_frames = 10;
};

/// Five catalog assets (drawn from catalog_spec(seed)) standing in a 7 × 6 m
/// room, seen from a camera circling the room and looking inward.
nlohmann::json write_room_fixture(const std::filesystem::path& out_dir, const RoomFixtureOptions& opts);

struct HaloFixtureOptions {
  std::uint64_t seed = 0;
  int halo_px = 2;
  double noise = 0.002;
  int width = 256;
  int height = 192;
};

/// One long low box seen from the front. Mask pixels within halo_px of the
/// silhouette carry flying-pixel points between the box edge and the
/// background. Scale 1, no tilt.
nlohmann::json write_halo_fixture(const std::filesystem::path& out_dir, const HaloFixtureOptions& opts);

/// A convex room with 5 to max_objects boxes: a feasible arrangement is drawn
/// first, then every object is pushed off it so that they collide and poke
/// through the walls. The pushed positions are the anchors.
SceneLayout make_collision_scene(std::uint64_t seed, int max_objects = 20);
nlohmann::json write_collision_fixture(const std::filesystem::path& out_dir, std::uint64_t seed);

/// kind ∈ {room, halo, catalog, collision-scene}; throws UnknownKind.
nlohmann::json gen_fixture(const std::string& kind, std::uint64_t seed, const std::filesystem::path& out_dir);

} // namespace vipscene
