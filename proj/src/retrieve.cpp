#include "vipscene/retrieve.hpp"

#include "vipscene/nn.hpp"
#include "vipscene/tensor.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>

namespace vipscene {

namespace fs = std::filesystem;
using nlohmann::json;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

// --- catalog ------------------------------------------------------------------

void AssetCatalog::add(AssetRecord record) {
  if (record.cloud.cols() == 0) throw Error(ErrorCode::InvalidCatalog, record.asset_id + ": empty sample cloud");
  std::string id = record.asset_id;
  records_.insert_or_assign(std::move(id), std::move(record));
  rebuild_index();
}

const AssetRecord* AssetCatalog::find(const std::string& asset_id) const {
  const auto it = records_.find(asset_id);
  return it == records_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& AssetCatalog::ids_for_category(const std::string& category) const {
  static const std::vector<std::string> kNone;
  const auto it = by_category_.find(lowercase(category));
  return it == by_category_.end() ? kNone : it->second;
}

void AssetCatalog::rebuild_index() {
  by_category_.clear();
  for (const auto& [id, rec] : records_) by_category_[lowercase(rec.category)].push_back(id);
}

bool AssetCatalog::index_consistent() const {
  std::size_t indexed = 0;
  for (const auto& [cat, ids] : by_category_) {
    indexed += ids.size();
    for (const auto& id : ids) {
      const AssetRecord* rec = find(id);
      if (!rec || lowercase(rec->category) != cat) return false;
    }
  }
  return indexed == records_.size();
}

AssetCatalog load_catalog(const fs::path& dir) {
  const fs::path meta = dir / "catalog.json";
  std::ifstream in(meta);
  if (!in) throw Error(ErrorCode::MissingFile, meta.string());
  AssetCatalog catalog;
  try {
    const json j = json::parse(in);
    if (j.at("schema_version").get<int>() != 1) throw Error(ErrorCode::InvalidCatalog, "unsupported schema_version");
    for (const auto& a : j.at("assets")) {
      AssetRecord rec;
      rec.asset_id = a.at("asset_id").get<std::string>();
      rec.category = a.at("category").get<std::string>();
      const auto sz = a.at("canonical_size").get<std::vector<double>>();
      if (sz.size() != 3) throw Error(ErrorCode::InvalidCatalog, rec.asset_id + ": canonical_size needs 3 values");
      rec.canonical_size = Vec3<double>(sz[0], sz[1], sz[2]);

      const TensorFile t = read_tensor(dir / a.at("cloud").get<std::string>());
      if (t.dtype != Dtype::F32 || t.shape.size() != 2 || t.shape[1] != 3 || t.shape[0] == 0)
        throw Error(ErrorCode::InvalidCatalog, rec.asset_id + ": cloud must be non-empty N×3 f32");
      const auto v = t.as_f32();
      rec.cloud = Eigen::Map<const Points3<float>>(v.data(), 3, t.shape[0]).cast<double>();

      const Vec3<double> extent = rec.cloud.rowwise().maxCoeff() - rec.cloud.rowwise().minCoeff();
      if ((extent - rec.canonical_size).cwiseAbs().maxCoeff() > 1e-6)
        throw Error(ErrorCode::InvalidCatalog, rec.asset_id + ": canonical_size disagrees with cloud extents");
      catalog.add(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidCatalog, e.what());
  }
  return catalog;
}

void write_catalog(const fs::path& dir, const AssetCatalog& catalog) {
  fs::create_directories(dir / "assets");
  json j;
  j["schema_version"] = 1;
  j["assets"] = json::array();
  for (const auto& [id, rec] : catalog.records()) {
    const std::string rel = "assets/" + id + ".vipt";
    const Points3<float> f = rec.cloud.cast<float>();
    write_tensor(dir / rel, TensorFile::from_f32({static_cast<std::uint32_t>(f.cols()), 3},
                                                 std::span<const float>(f.data(), static_cast<std::size_t>(f.size()))));
    j["assets"].push_back({{"asset_id", id},
                           {"category", rec.category},
                           {"canonical_size", {rec.canonical_size.x(), rec.canonical_size.y(), rec.canonical_size.z()}},
                           {"cloud", rel}});
  }
  std::ofstream(dir / "catalog.json") << j.dump(2) << '\n';
}

// --- candidate filtering ------------------------------------------------------------

double size_similarity(const Vec3<double>& asset_size, const Vec3<double>& object_size) {
  return (asset_size.array() / object_size.array()).log().matrix().norm();
}

std::vector<const AssetRecord*> filter_candidates(const AssetCatalog& catalog, const ObjectInstance& object,
                                                  std::size_t k) {
  if (k == 0) throw Error(ErrorCode::DegenerateInput, "k must be at least 1");
  if (!object.obb) throw Error(ErrorCode::DegenerateInput, object.object_id + ": object has no bounding box");
  const auto& ids = catalog.ids_for_category(object.category);
  if (ids.empty()) throw Error(ErrorCode::NoCategoryMatch, "no asset of category '" + object.category + "'");

  std::vector<std::pair<double, const AssetRecord*>> ranked;
  for (const auto& id : ids) {
    const AssetRecord* rec = catalog.find(id);
    ranked.emplace_back(size_similarity(rec->canonical_size, object.obb->size), rec);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second->asset_id) < std::tie(b.first, b.second->asset_id);
  });
  std::vector<const AssetRecord*> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].second);
  return out;
}

PointCloud normalize_asset(const AssetRecord& asset, const Vec3<double>& size) {
  const Vec3<double> factor = size.cwiseQuotient(asset.canonical_size);
  return factor.asDiagonal() * asset.cloud;
}

// --- ICP -------------------------------------------------------------------------

namespace {

struct Matching {
  double rmse;
  PointCloud matched;
};

Matching match(const PointCloud& source, const KdTree3& tree, const PointCloud& target, const RigidTransformd& t) {
  Matching m{0, PointCloud(3, source.cols())};
  double sum = 0;
  for (Eigen::Index i = 0; i < source.cols(); ++i) {
    const auto hit = tree.nearest(t.apply(Vec3<double>(source.col(i))));
    m.matched.col(i) = target.col(hit.index);
    sum += hit.squared_distance;
  }
  m.rmse = std::sqrt(sum / double(source.cols()));
  return m;
}

} // namespace

double registration_rmse(const PointCloud& source, const PointCloud& target, const RigidTransformd& transform) {
  const KdTree3 tree(target);
  return match(source, tree, target, transform).rmse;
}

RigidTransformd best_rigid_transform(const PointCloud& from, const PointCloud& to) {
  const Vec3<double> mu_from = from.rowwise().mean();
  const Vec3<double> mu_to = to.rowwise().mean();
  const Mat3<double> cross_cov = (from.colwise() - mu_from) * (to.colwise() - mu_to).transpose();

  Eigen::JacobiSVD<Mat3<double>> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3<double>& u = svd.matrixU();
  const Mat3<double>& v = svd.matrixV();
  Vec3<double> d = Vec3<double>::Ones();
  if ((v * u.transpose()).determinant() < 0) d(2) = -1;

  RigidTransformd t;
  t.rotation = v * d.asDiagonal() * u.transpose();
  t.translation = mu_to - t.rotation * mu_from;
  return t;
}

RegistrationResult icp_register(const PointCloud& source, const PointCloud& target, const RigidTransformd& init,
                                const IcpConfig& cfg) {
  if (source.cols() == 0 || target.cols() == 0) throw Error(ErrorCode::DegenerateInput, "ICP needs non-empty clouds");
  const KdTree3 tree(target);

  RegistrationResult res;
  res.transform = init;
  Matching current = match(source, tree, target, init);
  res.rmse = current.rmse;
  res.trace.push_back({res.rmse, init});

  for (int it = 1; it <= std::max(1, cfg.max_iter); ++it) {
    res.iterations = it;
    const RigidTransformd next = best_rigid_transform(source, current.matched);
    Matching updated = match(source, tree, target, next);
    if (updated.rmse > res.rmse) { // only rounding can cause this; keep the better pose
      res.converged = true;
      break;
    }
    const double improvement = res.rmse - updated.rmse;
    res.transform = next;
    res.rmse = updated.rmse;
    current = std::move(updated);
    res.trace.push_back({res.rmse, next});
    if (improvement < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

PointCloud subsample(const PointCloud& cloud, Eigen::Index max_points, std::uint64_t seed) {
  if (cloud.cols() <= max_points) return cloud;
  std::vector<Eigen::Index> all(static_cast<std::size_t>(cloud.cols()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(max_points));
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(keep), max_points, rng);
  return cloud(Eigen::all, keep);
}

// --- selection -------------------------------------------------------------------

Selection select_asset(const ObjectInstance& object, const std::vector<const AssetRecord*>& candidates,
                       const Planed& ground, const RetrieveConfig& cfg) {
  if (candidates.empty()) throw Error(ErrorCode::NoCandidates, object.object_id + ": no candidates");

  ObjectInstance oriented = object;
  if (!oriented.obb) orient_instance(oriented, ground, cfg.obb);
  const OrientedBox& box = *oriented.obb;

  const PointCloud aligned = gravity_align(ground).rotation * object.cloud;
  const PointCloud target = subsample(PointCloud(aligned.colwise() - box.center), cfg.max_points, cfg.seed);
  const Planed upright{Vec3<double>::UnitY(), 0.0};

  Selection best;
  std::tuple<double, std::string, int> best_key{std::numeric_limits<double>::infinity(), "", 0};
  for (const AssetRecord* asset : candidates) {
    // Measure the asset the same way the object was measured (PCA yaw +
    // trimmed extents) so the scale ratio compares like with like.
    const double asset_theta = estimate_orientation(asset->cloud, upright);
    const OrientedBox asset_box = fit_obb(asset->cloud, asset_theta, upright, cfg.obb);
    Vec3<double> ratio = box.size.cwiseQuotient(asset_box.size);
    if (std::abs(std::sin(asset_theta)) > std::abs(std::cos(asset_theta))) std::swap(ratio.x(), ratio.z());
    const Vec3<double> scaled_size = asset->canonical_size.cwiseProduct(ratio);

    const PointCloud source = subsample(normalize_asset(*asset, scaled_size), cfg.max_points, cfg.seed);
    const Vec3<double> scaled_center = ratio.cwiseProduct(asset_box.center);

    RigidTransformd init;
    init.rotation = yaw_rotation(box.theta - asset_theta);
    init.translation = -(init.rotation * scaled_center);
    RigidTransformd init_flipped;
    init_flipped.rotation = yaw_rotation(box.theta - asset_theta + std::numbers::pi);
    init_flipped.translation = -(init_flipped.rotation * scaled_center);

    const RegistrationResult primary = icp_register(source, target, init, cfg.icp);
    const RegistrationResult flipped = icp_register(source, target, init_flipped, cfg.icp);
    best.scores.push_back({asset->asset_id, primary.rmse, flipped.rmse});

    for (int pose = 0; pose < 2; ++pose) {
      const RegistrationResult& r = pose == 0 ? primary : flipped;
      std::tuple<double, std::string, int> key{r.rmse, asset->asset_id, pose};
      if (best.asset == nullptr || key < best_key) {
        best_key = key;
        best.asset = asset;
        best.rmse = r.rmse;
        best.flipped = pose == 1;
        best.size = scaled_size;
        RigidTransformd to_world;
        to_world.translation = box.center;
        best.transform = to_world.compose(r.transform);
      }
    }
  }
  best.resolved_theta = yaw_of(best.transform.rotation);
  return best;
}

} // namespace vipscene
