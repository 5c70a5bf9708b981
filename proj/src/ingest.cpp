#include "vipscene/ingest.hpp"

#include "vipscene/tensor.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace vipscene {

namespace fs = std::filesystem;
using nlohmann::json;

const Frame* FrameSet::find_frame(const std::string& frame_id) const {
  for (const auto& f : frames)
    if (f.frame_id == frame_id) return &f;
  return nullptr;
}

// --- manifest -----------------------------------------------------------------

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  }

  Manifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1)
      throw Error(ErrorCode::InvalidManifest, "unsupported schema_version " + std::to_string(m.schema_version));
    m.units = j.value("units", std::string("reconstruction"));
    m.fps = j.value("fps", 2.0);
    for (const auto& f : j.at("frames")) {
      m.frames.push_back({f.at("frame_id").get<std::string>(), f.at("point_map").get<std::string>(),
                          f.at("valid_mask").get<std::string>(), f.at("mono_depth").get<std::string>(),
                          f.at("recon_depth").get<std::string>()});
    }
    for (const auto& [id, t] : j.at("tracks").items()) {
      TrackEntry entry;
      entry.category = t.at("category").get<std::string>();
      entry.masks = t.at("masks").get<std::map<std::string, std::string>>();
      m.tracks.emplace(id, std::move(entry));
    }
    if (j.contains("floor")) m.floor_masks = j["floor"].at("masks").get<std::map<std::string, std::string>>();
    if (j.contains("room_polygon") && !j["room_polygon"].is_null()) {
      std::vector<Vec2<double>> poly;
      for (const auto& v : j["room_polygon"]) poly.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      m.room_polygon = std::move(poly);
    }
    m.description = j.value("description", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["units"] = m.units;
  j["fps"] = m.fps;
  j["frames"] = json::array();
  for (const auto& f : m.frames)
    j["frames"].push_back({{"frame_id", f.frame_id},
                           {"point_map", f.point_map},
                           {"valid_mask", f.valid_mask},
                           {"mono_depth", f.mono_depth},
                           {"recon_depth", f.recon_depth}});
  j["tracks"] = json::object();
  for (const auto& [id, t] : m.tracks) j["tracks"][id] = {{"category", t.category}, {"masks", t.masks}};
  if (!m.floor_masks.empty()) j["floor"] = {{"masks", m.floor_masks}};
  if (m.room_polygon) {
    j["room_polygon"] = json::array();
    for (const auto& v : *m.room_polygon) j["room_polygon"].push_back({v.x(), v.y()});
  }
  j["description"] = m.description;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << '\n';
}

// --- loading --------------------------------------------------------------------

namespace {

TensorFile require_tensor(const fs::path& path, ErrorCode missing_code) {
  if (!fs::exists(path)) throw Error(missing_code, path.string());
  return read_tensor(path);
}

void check_shape(const TensorFile& t, std::vector<std::uint32_t> expected, const std::string& what) {
  if (t.shape != expected) throw Error(ErrorCode::ShapeMismatch, what);
}

Grid<double> load_depth(const TensorFile& t, Eigen::Index h, Eigen::Index w) {
  const auto v = t.as_f32();
  return Eigen::Map<const Grid<float>>(v.data(), h, w).cast<double>();
}

BinaryMask load_mask(const fs::path& path, std::uint32_t h, std::uint32_t w, ErrorCode missing_code) {
  const TensorFile t = require_tensor(path, missing_code);
  if (t.dtype != Dtype::U8) throw Error(ErrorCode::UnsupportedDtype, "mask must be u8: " + path.string());
  check_shape(t, {h, w}, "mask shape differs from frame: " + path.string());
  const auto v = t.as_u8();
  return BinaryMask(Eigen::Map<const Grid<std::uint8_t>>(v.data(), h, w));
}

} // namespace

FrameSet load_frameset(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  if (m.frames.empty()) throw Error(ErrorCode::InvalidManifest, "manifest has no frames");

  FrameSet fsout;
  fsout.fps = m.fps;
  fsout.units = m.units;
  fsout.description = m.description;
  if (m.room_polygon) {
    Polygon2Dd room(*m.room_polygon);
    if (room.empty() || !room.is_convex())
      throw Error(ErrorCode::InvalidManifest, "room_polygon must be a non-degenerate convex polygon");
    fsout.room = std::move(room);
  }

  std::uint32_t h = 0, w = 0;
  for (const auto& e : m.frames) {
    if (fsout.find_frame(e.frame_id)) throw Error(ErrorCode::InvalidManifest, "duplicate frame_id " + e.frame_id);
    const TensorFile pts = require_tensor(base / e.point_map, ErrorCode::MissingFile);
    if (pts.shape.size() != 3 || pts.shape[2] != 3 || pts.dtype != Dtype::F32)
      throw Error(ErrorCode::ShapeMismatch, "point map must be H×W×3 f32: " + e.point_map);
    if (fsout.frames.empty()) {
      h = pts.shape[0];
      w = pts.shape[1];
    }
    check_shape(pts, {h, w, 3}, "frame " + e.frame_id + " point map differs in size");

    Frame f;
    f.frame_id = e.frame_id;
    const auto p = pts.as_f32();
    f.point_map = Eigen::Map<const Points3<float>>(p.data(), 3, Eigen::Index(h) * w).cast<double>();

    const TensorFile valid = require_tensor(base / e.valid_mask, ErrorCode::MissingFile);
    check_shape(valid, {h, w}, "valid mask shape: " + e.valid_mask);
    const auto vv = valid.as_u8();
    f.valid_mask = Eigen::Map<const Grid<std::uint8_t>>(vv.data(), h, w);

    const TensorFile mono = require_tensor(base / e.mono_depth, ErrorCode::MissingFile);
    check_shape(mono, {h, w}, "mono depth shape: " + e.mono_depth);
    f.mono_depth = load_depth(mono, h, w);
    const TensorFile recon = require_tensor(base / e.recon_depth, ErrorCode::MissingFile);
    check_shape(recon, {h, w}, "recon depth shape: " + e.recon_depth);
    f.recon_depth = load_depth(recon, h, w);
    fsout.frames.push_back(std::move(f));
  }

  for (const auto& [id, t] : m.tracks) {
    Track track;
    track.category = t.category;
    for (const auto& [frame_id, rel] : t.masks) {
      if (!fsout.find_frame(frame_id))
        throw Error(ErrorCode::DanglingTrackRef, id + " references unknown frame " + frame_id);
      track.masks.emplace(frame_id, load_mask(base / rel, h, w, ErrorCode::DanglingTrackRef));
    }
    fsout.tracks.emplace(id, std::move(track));
  }
  for (const auto& [frame_id, rel] : m.floor_masks) {
    if (!fsout.find_frame(frame_id)) throw Error(ErrorCode::DanglingTrackRef, "floor references unknown frame " + frame_id);
    fsout.floor_masks.emplace(frame_id, load_mask(base / rel, h, w, ErrorCode::DanglingTrackRef));
  }
  return fsout;
}

// --- rescaling --------------------------------------------------------------------

double estimate_scene_scale(const FrameSet& frames) {
  std::vector<double> ratios;
  for (const auto& f : frames.frames) {
    for (Eigen::Index r = 0; r < f.height(); ++r)
      for (Eigen::Index c = 0; c < f.width(); ++c) {
        const double recon = f.recon_depth(r, c);
        if (!f.valid(r, c) || !(recon > kMinReconDepth)) continue;
        const double ratio = f.mono_depth(r, c) / recon;
        if (std::isfinite(ratio)) ratios.push_back(ratio);
      }
  }
  if (ratios.empty()) throw Error(ErrorCode::NoValidPixels, "no pixel has a usable depth ratio");

  const std::size_t n = ratios.size();
  const auto upper = ratios.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(ratios.begin(), upper, ratios.end());
  const double hi = *upper;
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(ratios.begin(), upper);
  return lo + (hi - lo) / 2;
}

FrameSet rescale_frameset(const FrameSet& frames, double scale) {
  if (!(scale > 0) || !std::isfinite(scale))
    throw Error(ErrorCode::NonPositiveScale, "scale must be positive, got " + std::to_string(scale));
  FrameSet out = frames;
  for (auto& f : out.frames) {
    f.point_map *= scale;
    f.recon_depth *= scale;
  }
  return out;
}

} // namespace vipscene
