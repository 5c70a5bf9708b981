#include "vipscene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

namespace vipscene {

using nlohmann::json;

// --- document ----------------------------------------------------------------------

json to_json(const SceneDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["description"] = doc.description;
  if (doc.room) {
    j["room"] = json::array();
    for (const auto& v : *doc.room) j["room"].push_back({v.x(), v.y()});
  } else {
    j["room"] = nullptr;
  }
  j["objects"] = json::array();
  for (const auto& o : doc.objects) {
    json jo;
    jo["object_id"] = o.object_id;
    jo["category"] = o.category;
    jo["asset_id"] = o.asset_id ? json(*o.asset_id) : json(nullptr);
    jo["size"] = {o.size.x(), o.size.y(), o.size.z()};
    jo["position"] = {o.position.x(), o.position.y(), o.position.z()};
    jo["theta"] = o.theta;
    j["objects"].push_back(std::move(jo));
  }
  return j;
}

SceneDocument scene_from_json(const json& j) {
  SceneDocument doc;
  try {
    doc.schema_version = j.at("schema_version").get<int>();
    if (doc.schema_version != 1) throw Error(ErrorCode::InvalidDocument, "unsupported schema_version");
    doc.description = j.value("description", std::string());
    if (j.contains("room") && !j["room"].is_null()) {
      std::vector<Vec2<double>> room;
      for (const auto& v : j["room"]) room.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      doc.room = std::move(room);
    }
    for (const auto& jo : j.at("objects")) {
      SceneObject o;
      o.object_id = jo.at("object_id").get<std::string>();
      o.category = jo.at("category").get<std::string>();
      if (!jo.at("asset_id").is_null()) o.asset_id = jo["asset_id"].get<std::string>();
      const auto size = jo.at("size").get<std::vector<double>>();
      const auto pos = jo.at("position").get<std::vector<double>>();
      if (size.size() != 3 || pos.size() != 3) throw Error(ErrorCode::InvalidDocument, "size/position need 3 values");
      o.size = Vec3<double>(size[0], size[1], size[2]);
      o.position = Vec3<double>(pos[0], pos[1], pos[2]);
      o.theta = jo.at("theta").get<double>();
      doc.objects.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, e.what());
  }
  return doc;
}

std::string serialize_scene(const SceneDocument& doc) { return to_json(doc).dump(2) + "\n"; }

SceneDocument parse_scene(const std::string& text) {
  try {
    return scene_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, e.what());
  }
}

SceneDocument read_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  return parse_scene(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

void write_scene(const std::filesystem::path& path, const SceneDocument& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << serialize_scene(doc);
}

SceneDocument export_scene(const SceneLayout& layout,
                           const std::map<std::string, std::optional<std::string>>& assignments,
                           const std::string& description) {
  SceneDocument doc;
  doc.description = description;
  if (layout.room) doc.room = layout.room->vertices();

  const Vec3<double>& n = layout.ground.normal;
  for (const auto& p : layout.objects) {
    const auto it = assignments.find(p.object_id);
    if (it == assignments.end()) throw Error(ErrorCode::InvalidDocument, p.object_id + " has no asset assignment");
    const double x = p.position().x(), z = p.position().y();
    const double floor_y = std::abs(n.y()) > 1e-12 ? (layout.ground.offset - n.x() * x - n.z() * z) / n.y() : 0.0;
    const bool mounted = p.y_min - floor_y > kMountingThreshold;
    const double y = mounted ? (p.y_min + p.y_max) / 2 : floor_y + p.size.y() / 2;
    doc.objects.push_back({p.object_id, p.category, it->second, p.size, Vec3<double>(x, y, z), p.theta});
  }
  std::stable_sort(doc.objects.begin(), doc.objects.end(),
                   [](const SceneObject& a, const SceneObject& b) { return a.object_id < b.object_id; });
  return doc;
}

// --- rendering helpers --------------------------------------------------------------

std::uint32_t fnv1a(const std::string& text) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

Rgb category_color(const std::string& category) {
  const std::uint32_t h = fnv1a(category);
  return {static_cast<std::uint8_t>(h & 0xFFu), static_cast<std::uint8_t>((h >> 8) & 0xFFu),
          static_cast<std::uint8_t>((h >> 16) & 0xFFu)};
}

namespace {

constexpr Rgb kOutline{64, 64, 64};

Rgb shade(Rgb c, double factor) {
  Rgb out;
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(c[static_cast<std::size_t>(i)] * factor));
  return out;
}

// Fills a convex polygon given in pixel coordinates (pixel centers at +0.5).
void fill_polygon(RasterImage& img, const Polygon2Dd& poly, Rgb color) {
  if (poly.empty()) return;
  const auto [lo, hi] = poly.bounds();
  const int x0 = std::max(0, static_cast<int>(std::floor(lo.x() - 0.5)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(hi.x() - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(lo.y() - 0.5)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(hi.y() - 0.5)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (poly.contains(Vec2<double>(x + 0.5, y + 0.5))) img.set(x, y, color);
}

void draw_line(RasterImage& img, const Vec2<double>& a, const Vec2<double>& b, Rgb color) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
  for (int i = 0; i <= steps; ++i) {
    const Vec2<double> p = a + (b - a) * (double(i) / steps);
    img.set(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())), color);
  }
}

Polygon2Dd object_footprint(const SceneObject& o) {
  return footprint_rectangle(o.size, Vec2<double>(o.position.x(), o.position.z()), o.theta);
}

// The 8 corners of an object's box in world coordinates; bit 0 → x, bit 1 → y, bit 2 → z.
std::array<Vec3<double>, 8> box_corners(const SceneObject& o) {
  const Mat3<double> rot = yaw_rotation(o.theta);
  std::array<Vec3<double>, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3<double> local((i & 1 ? 0.5 : -0.5) * o.size.x(), (i & 2 ? 0.5 : -0.5) * o.size.y(),
                             (i & 4 ? 0.5 : -0.5) * o.size.z());
    out[static_cast<std::size_t>(i)] = rot * local + o.position;
  }
  return out;
}

} // namespace

RasterImage render_topdown(const SceneDocument& doc, int width, int height) {
  RasterImage img(width, height, kBackground);
  std::optional<Polygon2Dd> room;
  if (doc.room) room = Polygon2Dd(*doc.room);

  Vec2<double> lo = Vec2<double>::Constant(std::numeric_limits<double>::infinity());
  Vec2<double> hi = -lo;
  if (room && !room->empty()) {
    std::tie(lo, hi) = room->bounds();
  } else {
    for (const auto& o : doc.objects) {
      const auto [a, b] = object_footprint(o).bounds();
      lo = lo.cwiseMin(a);
      hi = hi.cwiseMax(b);
    }
  }
  if (!std::isfinite(lo.x())) return img;

  Vec2<double> extent = hi - lo;
  for (int i = 0; i < 2; ++i)
    if (extent(i) <= 0) extent(i) = 1.0;
  lo -= 0.1 * extent;
  extent *= 1.2;
  const double scale = std::min(width / extent.x(), height / extent.y());
  const Vec2<double> offset((width - scale * extent.x()) / 2, (height - scale * extent.y()) / 2);
  auto to_pixels = [&](const Vec2<double>& p) -> Vec2<double> { return offset + (p - lo) * scale; };

  std::vector<std::size_t> order(doc.objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto top = [&](std::size_t i) { return doc.objects[i].position.y() + doc.objects[i].size.y() / 2; };
    return top(a) < top(b);
  });
  for (std::size_t idx : order) {
    const SceneObject& o = doc.objects[idx];
    std::vector<Vec2<double>> px;
    const Polygon2Dd footprint = object_footprint(o);
    for (const auto& v : footprint.vertices()) px.push_back(to_pixels(v));
    fill_polygon(img, Polygon2Dd(std::move(px)), category_color(o.category));
  }
  if (room) {
    const auto& v = room->vertices();
    for (std::size_t i = 0; i < v.size(); ++i) draw_line(img, to_pixels(v[i]), to_pixels(v[(i + 1) % v.size()]), kOutline);
  }
  return img;
}

RasterImage render_fpv(const SceneDocument& doc, const CameraPose& pose) {
  RasterImage img(pose.width, pose.height, kBackground);
  constexpr double kNear = 0.05;

  double yaw = std::fmod(pose.yaw, 2 * std::numbers::pi);
  if (yaw < 0) yaw += 2 * std::numbers::pi;
  const Vec3<double> forward(std::sin(yaw) * std::cos(pose.pitch), std::sin(pose.pitch),
                             std::cos(yaw) * std::cos(pose.pitch));
  const Vec3<double> right = forward.cross(Vec3<double>::UnitY()).normalized();
  const Vec3<double> up = right.cross(forward);
  const double focal = (pose.width / 2.0) / std::tan(pose.fov / 2);

  struct Face {
    std::array<Vec3<double>, 4> corners;
    Vec3<double> normal;
    double distance;
    Rgb color;
  };
  // corner indices per face, wound around the face; normals follow from the box frame
  static constexpr std::array<std::array<int, 4>, 6> kFaces{{
      {0, 2, 6, 4}, {1, 3, 7, 5}, // -x, +x
      {0, 1, 5, 4}, {2, 3, 7, 6}, // -y, +y
      {0, 1, 3, 2}, {4, 5, 7, 6}, // -z, +z
  }};

  std::vector<Face> faces;
  for (const auto& o : doc.objects) {
    const auto corners = box_corners(o);
    const Mat3<double> rot = yaw_rotation(o.theta);
    for (std::size_t f = 0; f < kFaces.size(); ++f) {
      Face face;
      Vec3<double> centroid = Vec3<double>::Zero();
      for (int k = 0; k < 4; ++k) {
        face.corners[static_cast<std::size_t>(k)] = corners[static_cast<std::size_t>(kFaces[f][static_cast<std::size_t>(k)])];
        centroid += face.corners[static_cast<std::size_t>(k)] / 4;
      }
      Vec3<double> local_normal = Vec3<double>::Zero();
      local_normal(static_cast<Eigen::Index>(f / 2)) = f % 2 == 0 ? -1 : 1;
      face.normal = rot * local_normal;
      const Vec3<double> to_eye = pose.eye - centroid;
      if (face.normal.dot(to_eye) <= 0) continue; // back face
      face.distance = to_eye.norm();
      face.color = shade(category_color(o.category), 0.35 + 0.65 * std::abs(face.normal.dot(to_eye.normalized())));
      faces.push_back(face);
    }
  }
  std::stable_sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.distance > b.distance; });

  for (const auto& face : faces) {
    // camera coordinates (right, up, forward), clipped against the near plane
    std::vector<Vec3<double>> cam;
    for (const auto& c : face.corners) {
      const Vec3<double> d = c - pose.eye;
      cam.emplace_back(d.dot(right), d.dot(up), d.dot(forward));
    }
    std::vector<Vec3<double>> clipped;
    for (std::size_t i = 0; i < cam.size(); ++i) {
      const Vec3<double>& cur = cam[i];
      const Vec3<double>& prev = cam[(i + cam.size() - 1) % cam.size()];
      const bool cur_in = cur.z() >= kNear, prev_in = prev.z() >= kNear;
      if (cur_in != prev_in) clipped.push_back(prev + (cur - prev) * ((kNear - prev.z()) / (cur.z() - prev.z())));
      if (cur_in) clipped.push_back(cur);
    }
    if (clipped.size() < 3) continue;

    std::vector<Vec2<double>> px;
    for (const auto& c : clipped)
      px.emplace_back(pose.width / 2.0 + focal * c.x() / c.z(), pose.height / 2.0 - focal * c.y() / c.z());
    fill_polygon(img, Polygon2Dd(px), face.color);
    const Rgb edge = shade(face.color, 0.5);
    for (std::size_t i = 0; i < px.size(); ++i) draw_line(img, px[i], px[(i + 1) % px.size()], edge);
  }
  return img;
}

} // namespace vipscene
