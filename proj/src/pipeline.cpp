#include "vipscene/pipeline.hpp"

#include "vipscene/log.hpp"
#include "vipscene/tensor.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <thread>

namespace vipscene {

using nlohmann::json;
namespace fs = std::filesystem;

std::string StageError::strip_code(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

namespace {

template <typename F> auto tagged(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

// Runs fn(0..n-1) on up to `workers` threads; the first failure by index is rethrown.
template <typename F> void parallel_for(std::size_t n, int workers, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double wrap_angle(double a) {
  a = std::fmod(a, 2 * std::numbers::pi);
  return a < 0 ? a + 2 * std::numbers::pi : a;
}

json plane_json(const Planed& p) {
  return {{"normal", {p.normal.x(), p.normal.y(), p.normal.z()}}, {"offset", p.offset}};
}

Planed plane_from_json(const json& j) {
  const auto n = j.at("normal").get<std::vector<double>>();
  if (n.size() != 3) throw Error(ErrorCode::InvalidDocument, "plane normal needs 3 values");
  return {Vec3<double>(n[0], n[1], n[2]).normalized(), j.at("offset").get<double>()};
}

Vec3<double> vec3_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error(ErrorCode::InvalidDocument, "expected 3 values");
  return {v[0], v[1], v[2]};
}

} // namespace

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << "\n";
}

// --- stages ------------------------------------------------------------------------------

IngestResult ingest_stage(const fs::path& manifest, const PipelineConfig& cfg) {
  return tagged("ingest", [&] {
    IngestResult r;
    const FrameSet raw = load_frameset(manifest);
    r.scale = estimate_scene_scale(raw);
    r.frames = rescale_frameset(raw, r.scale);
    log_event("scale_estimated", {{"scale", r.scale}, {"frames", r.frames.frames.size()}});

    if (r.frames.floor_masks.empty()) {
      r.floor_fallback = true;
      log_event("floor_fallback", {{"level", "warning"}, {"reason", "manifest has no floor masks; using y = 0"}});
      return r;
    }
    const Erosion erosion = cfg.erosion_enabled ? Erosion::On : Erosion::Off;
    PointCloud floor = gather_masked_points(r.frames, r.frames.floor_masks, erosion, cfg.erosion);
    if (floor.cols() < 3) floor = gather_masked_points(r.frames, r.frames.floor_masks, Erosion::Off, cfg.erosion);

    // every 7th valid pixel of the scene decides which side of the floor is up
    std::vector<Vec3<double>> sample;
    std::size_t k = 0;
    for (const auto& f : r.frames.frames)
      for (Eigen::Index i = 0; i < f.point_map.cols(); ++i)
        if (f.valid(i / f.width(), i % f.width()) && k++ % 7 == 0) sample.push_back(f.point_map.col(i));
    PointCloud reference(3, static_cast<Eigen::Index>(sample.size()));
    for (std::size_t i = 0; i < sample.size(); ++i) reference.col(static_cast<Eigen::Index>(i)) = sample[i];

    r.ground = fit_plane_lsq(floor, &reference);
    log_event("floor_plane", {{"normal", {r.ground.normal.x(), r.ground.normal.y(), r.ground.normal.z()}},
                              {"offset", r.ground.offset},
                              {"points", floor.cols()}});
    return r;
  });
}

ObjectSet extract_stage(const IngestResult& ingest, const PipelineConfig& cfg) {
  return tagged("extract", [&] {
    ObjectSet set;
    set.description = ingest.frames.description;
    set.scale = ingest.scale;
    set.ground = ingest.ground;
    set.room = ingest.frames.room;

    std::vector<std::string> ids;
    for (const auto& [id, track] : ingest.frames.tracks) ids.push_back(id);
    set.objects.resize(ids.size());
    const Erosion erosion = cfg.erosion_enabled ? Erosion::On : Erosion::Off;
    parallel_for(ids.size(), cfg.workers, [&](std::size_t i) {
      try {
        set.objects[i] = extract_object_cloud(ingest.frames, ids[i], erosion, cfg.erosion);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyAfterErosion) throw;
        log_event("erosion_skipped", {{"level", "warning"}, {"object_id", ids[i]}});
        set.objects[i] = extract_object_cloud(ingest.frames, ids[i], Erosion::Off, cfg.erosion);
      }
    });
    for (const auto& o : set.objects)
      log_event("object_extracted", {{"object_id", o.object_id}, {"category", o.category}, {"points", o.cloud.cols()}});
    return set;
  });
}

void orient_stage(ObjectSet& set, const PipelineConfig& cfg) {
  tagged("orient", [&] {
    parallel_for(set.objects.size(), cfg.workers, [&](std::size_t i) { orient_instance(set.objects[i], set.ground, cfg.obb); });
    for (const auto& o : set.objects)
      log_event("object_oriented", {{"object_id", o.object_id},
                                    {"theta", *o.theta},
                                    {"size", {o.obb->size.x(), o.obb->size.y(), o.obb->size.z()}}});
    return 0;
  });
}

LayoutDocument retrieve_stage(const ObjectSet& set, const AssetCatalog& catalog, const PipelineConfig& cfg,
                              std::vector<RetrievalRecord>* records) {
  return tagged("retrieve", [&] {
    ObjectSet oriented = set;
    for (auto& o : oriented.objects)
      if (!o.obb) orient_instance(o, set.ground, cfg.obb);

    const Mat3<double> align = gravity_align(set.ground).rotation;
    LayoutDocument doc;
    doc.description = set.description;
    doc.layout.room = set.room;
    doc.layout.ground = Planed{align * set.ground.normal, set.ground.offset};

    std::vector<RetrievalRecord> recs(oriented.objects.size());
    std::vector<PlacedObject> placed(oriented.objects.size());
    parallel_for(oriented.objects.size(), cfg.workers, [&](std::size_t i) {
      const ObjectInstance& o = oriented.objects[i];
      const OrientedBox& box = *o.obb;
      const double y_min = box.center.y() - box.size.y() / 2, y_max = box.center.y() + box.size.y() / 2;
      recs[i].object_id = o.object_id;
      std::vector<const AssetRecord*> candidates;
      try {
        candidates = filter_candidates(catalog, o, cfg.retrieve.k);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoCategoryMatch) throw;
        log_event("object_unmatched", {{"level", "warning"}, {"object_id", o.object_id}, {"category", o.category}});
        placed[i] = PlacedObject(o.object_id, o.category, box.size, Vec2<double>(box.center.x(), box.center.z()),
                                 box.theta, y_min, y_max);
        return;
      }
      const Selection sel = select_asset(o, candidates, set.ground, cfg.retrieve);
      recs[i].asset_id = sel.asset->asset_id;
      recs[i].rmse = sel.rmse;
      recs[i].flipped = sel.flipped;
      recs[i].scores = sel.scores;
      const Vec3<double>& t = sel.transform.translation;
      placed[i] = PlacedObject(o.object_id, o.category, sel.size, Vec2<double>(t.x(), t.z()),
                               wrap_angle(sel.resolved_theta), y_min, y_max);
    });
    for (std::size_t i = 0; i < recs.size(); ++i) {
      doc.assets[recs[i].object_id] = recs[i].asset_id;
      if (recs[i].asset_id)
        log_event("asset_selected", {{"object_id", recs[i].object_id}, {"asset_id", *recs[i].asset_id},
                                     {"rmse", recs[i].rmse}, {"flipped", recs[i].flipped}});
    }
    doc.layout.objects = std::move(placed);
    doc.layout.sort_objects();
    if (records) *records = std::move(recs);
    return doc;
  });
}

PipelineResult run_pipeline(const fs::path& manifest, const fs::path& catalog_dir, const PipelineConfig& cfg,
                            const fs::path& out_dir) {
  PipelineResult result;
  const AssetCatalog catalog = tagged("retrieve", [&] { return load_catalog(catalog_dir); });
  const IngestResult ingest = ingest_stage(manifest, cfg);
  result.scale = ingest.scale;
  ObjectSet set = extract_stage(ingest, cfg);
  orient_stage(set, cfg);
  result.layout = retrieve_stage(set, catalog, cfg, &result.retrieval);

  auto [refined, report] = tagged("refine", [&] { return refine_layout(result.layout.layout, cfg.refine); });
  log_event("refine_done", {{"iterations", report.iterations}, {"reason", to_string(report.reason)},
                            {"final_loss", report.final_loss}});
  result.refine = std::move(report);
  result.scene = tagged("export", [&] { return export_scene(refined, result.layout.assets, set.description); });

  tagged("export", [&] {
    write_scene(out_dir / "scene.json", result.scene);
    write_json_file(out_dir / "refine_report.json", to_json(result.refine));
    write_layout(out_dir / "layout.json", result.layout);
    write_json_file(out_dir / "retrieval.json", to_json(result.retrieval));
    return 0;
  });
  return result;
}

// --- stage files ------------------------------------------------------------------------

void write_object_set(const fs::path& out_dir, const ObjectSet& set) {
  json j;
  j["schema_version"] = 1;
  j["description"] = set.description;
  j["scale"] = set.scale;
  j["ground"] = plane_json(set.ground);
  if (set.room) {
    j["room"] = json::array();
    for (const auto& v : set.room->vertices()) j["room"].push_back({v.x(), v.y()});
  } else {
    j["room"] = nullptr;
  }
  j["objects"] = json::array();
  for (const auto& o : set.objects) {
    const std::string rel = "objects/" + o.object_id + ".vipt";
    std::vector<float> values(static_cast<std::size_t>(o.cloud.size()));
    for (Eigen::Index i = 0; i < o.cloud.cols(); ++i)
      for (int a = 0; a < 3; ++a) values[static_cast<std::size_t>(i * 3 + a)] = static_cast<float>(o.cloud(a, i));
    write_tensor(out_dir / rel, TensorFile::from_f32({static_cast<std::uint32_t>(o.cloud.cols()), 3u}, values));
    json jo{{"object_id", o.object_id}, {"category", o.category}, {"cloud", rel}};
    jo["theta"] = o.theta ? json(*o.theta) : json(nullptr);
    jo["obb"] = o.obb ? json{{"center", {o.obb->center.x(), o.obb->center.y(), o.obb->center.z()}},
                             {"size", {o.obb->size.x(), o.obb->size.y(), o.obb->size.z()}},
                             {"theta", o.obb->theta}}
                      : json(nullptr);
    j["objects"].push_back(std::move(jo));
  }
  write_json_file(out_dir / "objects.json", j);
}

ObjectSet read_object_set(const fs::path& objects_json) {
  std::ifstream in(objects_json);
  if (!in) throw Error(ErrorCode::MissingFile, objects_json.string());
  ObjectSet set;
  try {
    const json j = json::parse(in);
    if (j.at("schema_version").get<int>() != 1) throw Error(ErrorCode::InvalidDocument, "unsupported schema_version");
    set.description = j.value("description", std::string());
    set.scale = j.at("scale").get<double>();
    set.ground = plane_from_json(j.at("ground"));
    if (!j.at("room").is_null()) {
      std::vector<Vec2<double>> room;
      for (const auto& v : j["room"]) room.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      set.room = Polygon2Dd(std::move(room));
    }
    for (const auto& jo : j.at("objects")) {
      ObjectInstance o;
      o.object_id = jo.at("object_id").get<std::string>();
      o.category = jo.at("category").get<std::string>();
      const TensorFile t = read_tensor(objects_json.parent_path() / jo.at("cloud").get<std::string>());
      if (t.dtype != Dtype::F32 || t.shape.size() != 2 || t.shape[1] != 3)
        throw Error(ErrorCode::ShapeMismatch, o.object_id + ": cloud must be an N×3 f32 tensor");
      const auto v = t.as_f32();
      o.cloud = Eigen::Map<const Eigen::Matrix<float, 3, Eigen::Dynamic>>(v.data(), 3, t.shape[0]).cast<double>();
      if (!jo.at("theta").is_null()) o.theta = jo["theta"].get<double>();
      if (!jo.at("obb").is_null())
        o.obb = OrientedBox{vec3_from_json(jo["obb"].at("center")), vec3_from_json(jo["obb"].at("size")),
                            jo["obb"].at("theta").get<double>()};
      set.objects.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, objects_json.string() + ": " + e.what());
  }
  return set;
}

json to_json(const std::vector<RetrievalRecord>& records) {
  json out = json::array();
  for (const auto& r : records) {
    json scores = json::array();
    for (const auto& s : r.scores)
      scores.push_back({{"asset_id", s.asset_id}, {"rmse_primary", s.rmse_primary}, {"rmse_flipped", s.rmse_flipped}});
    out.push_back({{"object_id", r.object_id},
                   {"asset_id", r.asset_id ? json(*r.asset_id) : json(nullptr)},
                   {"rmse", r.rmse},
                   {"flipped", r.flipped},
                   {"candidates", scores}});
  }
  return out;
}

} // namespace vipscene
