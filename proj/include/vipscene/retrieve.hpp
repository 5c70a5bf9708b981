#pragma once

// Asset retrieval by rigid registration: every candidate is scaled to the
// object's box, registered with point-to-point ICP from both PCA poses, and
// the (candidate, pose) with the lowest RMSE wins.

#include "vipscene/decompose.hpp"
#include "vipscene/geom.hpp"
#include "vipscene/orient.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vipscene {

/// Point-sampled asset in canonical pose: AABB centered at the origin, up +Y,
/// front +Z.
struct AssetRecord {
  std::string asset_id;
  std::string category;
  Vec3<double> canonical_size = Vec3<double>::Ones();
  PointCloud cloud;
};

class AssetCatalog {
public:
  /// Replaces an existing record with the same id.
  void add(AssetRecord record);

  const AssetRecord* find(const std::string& asset_id) const;
  /// Ids of a (lower-cased) category in ascending order.
  const std::vector<std::string>& ids_for_category(const std::string& category) const;

  const std::map<std::string, AssetRecord>& records() const { return records_; }
  bool index_consistent() const;

private:
  void rebuild_index();

  std::map<std::string, AssetRecord> records_;
  std::map<std::string, std::vector<std::string>> by_category_;
};

std::string lowercase(std::string s);

/// Directory with catalog.json plus one N×3 f32 tensor per asset.
AssetCatalog load_catalog(const std::filesystem::path& dir);
void write_catalog(const std::filesystem::path& dir, const AssetCatalog& catalog);

/// ‖log(asset_size ⊘ object_size)‖₂
double size_similarity(const Vec3<double>& asset_size, const Vec3<double>& object_size);

/// Category match (case-insensitive) ranked by size similarity, ties by id.
/// Errors: NoCategoryMatch, DegenerateInput (object without a box).
std::vector<const AssetRecord*> filter_candidates(const AssetCatalog& catalog, const ObjectInstance& object,
                                                  std::size_t k);

/// Anisotropic scale of the asset cloud so its AABB extents equal `size`.
PointCloud normalize_asset(const AssetRecord& asset, const Vec3<double>& size);
inline PointCloud normalize_asset(const AssetRecord& asset, const OrientedBox& box) {
  return normalize_asset(asset, box.size);
}

struct IcpConfig {
  int max_iter = 50;
  double tol = 1e-6; ///< stop once the RMSE improves by less than this (m)
};

struct IcpStep {
  double rmse;
  RigidTransformd transform;
};

struct RegistrationResult {
  RigidTransformd transform;
  double rmse = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<IcpStep> trace; ///< trace[0] is the initial pose
};

/// Root mean square of nearest-target distances of the transformed source.
double registration_rmse(const PointCloud& source, const PointCloud& target, const RigidTransformd& transform);

/// Least-squares rotation + translation mapping `from` onto `to` (paired by
/// column), with the reflection case corrected so det R = +1.
RigidTransformd best_rigid_transform(const PointCloud& from, const PointCloud& to);

/// Point-to-point ICP moving `source` onto `target`.
RegistrationResult icp_register(const PointCloud& source, const PointCloud& target, const RigidTransformd& init,
                                const IcpConfig& cfg = {});

/// Uniform subset of at most `max_points` columns (order preserved), seeded.
PointCloud subsample(const PointCloud& cloud, Eigen::Index max_points, std::uint64_t seed);

struct RetrieveConfig {
  std::size_t k = 5;
  IcpConfig icp;
  Eigen::Index max_points = 2048;
  std::uint64_t seed = 0;
  ObbConfig obb;
};

struct CandidateScore {
  std::string asset_id;
  double rmse_primary;
  double rmse_flipped;
};

struct Selection {
  const AssetRecord* asset = nullptr;
  RigidTransformd transform;  ///< canonical asset frame → gravity-aligned frame
  double resolved_theta = 0;  ///< yaw of the asset front, [0, 2π)
  double rmse = 0;
  bool flipped = false;       ///< the half-turn pose won
  Vec3<double> size;          ///< extents the asset was scaled to
  std::vector<CandidateScore> scores;
};

/// Registers every candidate from both poses and keeps the global RMSE
/// minimum; ties resolve by (rmse, asset_id, primary before flipped).
/// Errors: NoCandidates.
Selection select_asset(const ObjectInstance& object, const std::vector<const AssetRecord*>& candidates,
                       const Planed& ground, const RetrieveConfig& cfg = {});

} // namespace vipscene
