#include "vipscene/fixtures.hpp"

#include "vipscene/error.hpp"
#include "vipscene/ingest.hpp"
#include "vipscene/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

namespace vipscene {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

json vec_json(const Vec3<double>& v) { return {v.x(), v.y(), v.z()}; }

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << "\n";
}

// One solid piece of a shape, in the shape's canonical frame.
struct Part {
  bool cylinder = false;
  Vec3<double> center = Vec3<double>::Zero();
  Vec3<double> half = Vec3<double>::Constant(0.5);
};

std::vector<Part> shape_parts(const AssetShape& s) {
  const Vec3<double> h = s.size / 2;
  switch (s.kind) {
  case AssetShape::Kind::Box: return {Part{false, Vec3<double>::Zero(), h}};
  case AssetShape::Kind::Cylinder: return {Part{true, Vec3<double>::Zero(), h}};
  case AssetShape::Kind::LShape: {
    const double bar_depth = s.size.z() * 0.5, leg_width = s.size.x() * 0.35;
    Part bar{false, Vec3<double>(0, 0, -h.z() + bar_depth / 2), Vec3<double>(h.x(), h.y(), bar_depth / 2)};
    Part leg{false, Vec3<double>(h.x() - leg_width / 2, 0, 0), Vec3<double>(leg_width / 2, h.y(), h.z())};
    return {bar, leg};
  }
  }
  return {};
}

bool strictly_inside(const Part& part, const Vec3<double>& p) {
  const Vec3<double> q = p - part.center;
  constexpr double eps = 1e-9;
  if (std::abs(q.y()) >= part.half.y() - eps) return false;
  if (part.cylinder) {
    const double r = std::pow(q.x() / part.half.x(), 2) + std::pow(q.z() / part.half.z(), 2);
    return r < 1 - eps;
  }
  return std::abs(q.x()) < part.half.x() - eps && std::abs(q.z()) < part.half.z() - eps;
}

double part_area(const Part& p) {
  const Vec3<double> s = 2 * p.half;
  if (!p.cylinder) return 2 * (s.x() * s.y() + s.y() * s.z() + s.x() * s.z());
  const double a = p.half.x(), b = p.half.z();
  const double perimeter = std::numbers::pi * (3 * (a + b) - std::sqrt((3 * a + b) * (a + 3 * b)));
  return perimeter * s.y() + 2 * std::numbers::pi * a * b;
}

Vec3<double> sample_part_surface(const Part& p, Rng& rng) {
  const Vec3<double>& h = p.half;
  if (p.cylinder) {
    const double side = std::numbers::pi * (h.x() + h.z()) * 2 * h.y();
    const double cap = std::numbers::pi * h.x() * h.z();
    const double u = uniform(rng, 0, side + 2 * cap);
    const double phi = uniform(rng, 0, 2 * std::numbers::pi);
    if (u < side) return p.center + Vec3<double>(h.x() * std::cos(phi), uniform(rng, -h.y(), h.y()), h.z() * std::sin(phi));
    const double r = std::sqrt(uniform(rng, 0, 1));
    return p.center + Vec3<double>(r * h.x() * std::cos(phi), u < side + cap ? h.y() : -h.y(), r * h.z() * std::sin(phi));
  }
  const Vec3<double> s = 2 * h;
  const std::array<double, 3> face_area{s.y() * s.z(), s.x() * s.z(), s.x() * s.y()}; // normal along x, y, z
  double u = uniform(rng, 0, 2 * (face_area[0] + face_area[1] + face_area[2]));
  int axis = 0;
  while (axis < 2 && u >= 2 * face_area[static_cast<std::size_t>(axis)]) u -= 2 * face_area[static_cast<std::size_t>(axis++)];
  Vec3<double> q(uniform(rng, -h.x(), h.x()), uniform(rng, -h.y(), h.y()), uniform(rng, -h.z(), h.z()));
  q(axis) = u < face_area[static_cast<std::size_t>(axis)] ? -h(axis) : h(axis);
  return p.center + q;
}

// Extreme points that pin the AABB of a part.
std::vector<Vec3<double>> part_extremes(const Part& p) {
  std::vector<Vec3<double>> out;
  const Vec3<double>& h = p.half;
  if (p.cylinder) {
    for (double y : {-h.y(), h.y()})
      for (const auto& [x, z] : {std::pair{h.x(), 0.0}, {-h.x(), 0.0}, {0.0, h.z()}, {0.0, -h.z()}})
        out.push_back(p.center + Vec3<double>(x, y, z));
    return out;
  }
  for (int i = 0; i < 8; ++i)
    out.push_back(p.center + Vec3<double>(i & 1 ? h.x() : -h.x(), i & 2 ? h.y() : -h.y(), i & 4 ? h.z() : -h.z()));
  return out;
}

// --- ray casting ----------------------------------------------------------------

struct WorldObject {
  int label;
  Vec3<double> center; ///< AABB center of the shape in the world
  double theta;
  std::vector<Part> parts;
};

std::optional<double> hit_part(const Part& part, const Vec3<double>& origin, const Vec3<double>& dir) {
  const Vec3<double> o = origin - part.center;
  if (part.cylinder) {
    const double a = part.half.x(), b = part.half.z();
    const double ox = o.x() / a, oz = o.z() / b, dx = dir.x() / a, dz = dir.z() / b;
    std::optional<double> best;
    auto consider = [&](double t) {
      if (t > 1e-9 && (!best || t < *best)) best = t;
    };
    const double qa = dx * dx + dz * dz, qb = 2 * (ox * dx + oz * dz), qc = ox * ox + oz * oz - 1;
    const double disc = qb * qb - 4 * qa * qc;
    if (qa > 0 && disc >= 0) {
      for (double t : {(-qb - std::sqrt(disc)) / (2 * qa), (-qb + std::sqrt(disc)) / (2 * qa)})
        if (std::abs(o.y() + t * dir.y()) <= part.half.y()) consider(t);
    }
    if (std::abs(dir.y()) > 1e-12)
      for (double y : {-part.half.y(), part.half.y()}) {
        const double t = (y - o.y()) / dir.y();
        const double px = (o.x() + t * dir.x()) / a, pz = (o.z() + t * dir.z()) / b;
        if (px * px + pz * pz <= 1) consider(t);
      }
    return best;
  }
  double t_in = -std::numeric_limits<double>::infinity(), t_out = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir(k)) < 1e-15) {
      if (std::abs(o(k)) > part.half(k)) return std::nullopt;
      continue;
    }
    double t0 = (-part.half(k) - o(k)) / dir(k), t1 = (part.half(k) - o(k)) / dir(k);
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (t_in > t_out || t_in <= 1e-9) return std::nullopt;
  return t_in;
}

std::optional<double> hit_object(const WorldObject& obj, const Vec3<double>& origin, const Vec3<double>& dir) {
  const Mat3<double> rt = yaw_rotation(obj.theta).transpose();
  const Vec3<double> o = rt * (origin - obj.center), d = rt * dir;
  std::optional<double> best;
  for (const auto& part : obj.parts)
    if (const auto t = hit_part(part, o, d); t && (!best || *t < *best)) best = t;
  return best;
}

constexpr int kLabelWall = -1;
constexpr int kLabelFloor = -2;

struct RoomBox {
  Vec3<double> lo, hi;
};

struct Camera {
  Vec3<double> eye, forward, right, up;
  double focal;
  int width, height;

  // unnormalized ray with unit forward component, so t is the z-depth
  Vec3<double> ray(int r, int c) const {
    return forward + ((c + 0.5 - width / 2.0) / focal) * right - ((r + 0.5 - height / 2.0) / focal) * up;
  }
};

Camera look_at(const Vec3<double>& eye, const Vec3<double>& target, double fov, int width, int height) {
  Camera cam;
  cam.eye = eye;
  cam.forward = (target - eye).normalized();
  cam.right = cam.forward.cross(Vec3<double>::UnitY()).normalized();
  cam.up = cam.right.cross(cam.forward);
  cam.focal = (width / 2.0) / std::tan(fov / 2);
  cam.width = width;
  cam.height = height;
  return cam;
}

struct RenderedFrame {
  Grid<double> depth;   ///< metric z-depth
  Grid<int> label;      ///< object label, kLabelFloor or kLabelWall
  Grid<double> bg_depth;///< depth of the room shell behind every pixel
};

RenderedFrame cast_frame(const Camera& cam, const RoomBox& room, const std::vector<WorldObject>& objects) {
  RenderedFrame f{Grid<double>(cam.height, cam.width), Grid<int>(cam.height, cam.width), Grid<double>(cam.height, cam.width)};
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      const Vec3<double> d = cam.ray(r, c);
      double t_shell = std::numeric_limits<double>::infinity();
      int shell_label = kLabelWall;
      for (int k = 0; k < 3; ++k) {
        if (std::abs(d(k)) < 1e-15) continue;
        const double bound = d(k) > 0 ? room.hi(k) : room.lo(k);
        const double t = (bound - cam.eye(k)) / d(k);
        if (t < t_shell) {
          t_shell = t;
          shell_label = (k == 1 && d(k) < 0) ? kLabelFloor : kLabelWall;
        }
      }
      double t_best = t_shell;
      int label = shell_label;
      for (const auto& obj : objects)
        if (const auto t = hit_object(obj, cam.eye, d); t && *t < t_best) {
          t_best = *t;
          label = obj.label;
        }
      f.depth(r, c) = t_best;
      f.label(r, c) = label;
      f.bg_depth(r, c) = t_shell;
    }
  return f;
}

// Disc dilation of the pixels carrying `label`, restricted to pixels that do
// not belong to another object.
Grid<std::uint8_t> dilated_mask(const Grid<int>& label, int which, int radius) {
  Grid<std::uint8_t> out = Grid<std::uint8_t>::Zero(label.rows(), label.cols());
  for (Eigen::Index r = 0; r < label.rows(); ++r)
    for (Eigen::Index c = 0; c < label.cols(); ++c) {
      if (label(r, c) == which) {
        out(r, c) = BinaryMask::kOn;
        continue;
      }
      if (label(r, c) >= 0) continue;
      bool near = false;
      for (int dr = -radius; dr <= radius && !near; ++dr)
        for (int dc = -radius; dc <= radius && !near; ++dc) {
          const Eigen::Index rr = r + dr, cc = c + dc;
          if (dr * dr + dc * dc > radius * radius || rr < 0 || cc < 0 || rr >= label.rows() || cc >= label.cols()) continue;
          near = label(rr, cc) == which;
        }
      if (near) out(r, c) = BinaryMask::kOn;
    }
  return out;
}

// Depth of the nearest pixel of `which` within `radius`, if any.
std::optional<double> nearest_label_depth(const RenderedFrame& f, Eigen::Index r, Eigen::Index c, int which, int radius) {
  std::optional<double> depth;
  int best = std::numeric_limits<int>::max();
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc) {
      const Eigen::Index rr = r + dr, cc = c + dc;
      if (rr < 0 || cc < 0 || rr >= f.label.rows() || cc >= f.label.cols() || f.label(rr, cc) != which) continue;
      if (dr * dr + dc * dc < best) {
        best = dr * dr + dc * dc;
        depth = f.depth(rr, cc);
      }
    }
  return depth;
}

TensorFile grid_f32(const Grid<double>& g) {
  std::vector<float> v(static_cast<std::size_t>(g.size()));
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c) v[static_cast<std::size_t>(r * g.cols() + c)] = static_cast<float>(g(r, c));
  return TensorFile::from_f32({static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols())}, v);
}

TensorFile grid_u8(const Grid<std::uint8_t>& g) {
  std::vector<std::uint8_t> v(g.data(), g.data() + g.size());
  return TensorFile::from_u8({static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols())}, v);
}

struct FramesetSpec {
  RoomBox room;
  std::vector<WorldObject> objects;
  std::vector<std::string> object_ids;   ///< by label
  std::vector<std::string> categories;   ///< by label
  std::vector<Camera> cameras;
  double scale = 1;
  Mat3<double> tilt = Mat3<double>::Identity(); ///< reconstruction rotation applied to metric points
  double noise = 0;
  double outlier_fraction = 0;
  int halo_px = 0;
  bool flying_pixels = true;
  std::string description;
  std::optional<std::vector<Vec2<double>>> room_polygon;
};

// Writes tensors + manifest. Reconstruction coordinates are tilt·metric/scale,
// and depths are snapped to a 2⁻¹² grid so mono = recon·scale is exact in f32.
void write_frameset(const fs::path& out_dir, const FramesetSpec& spec, Rng& rng) {
  Manifest manifest;
  manifest.description = spec.description;
  manifest.room_polygon = spec.room_polygon;
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t k = 0; k < spec.cameras.size(); ++k) {
    const Camera& cam = spec.cameras[k];
    const RenderedFrame f = cast_frame(cam, spec.room, spec.objects);
    char name[16];
    std::snprintf(name, sizeof name, "f%03zu", k);
    const std::string fid = name;

    std::vector<Grid<std::uint8_t>> masks;
    for (std::size_t i = 0; i < spec.objects.size(); ++i)
      masks.push_back(dilated_mask(f.label, static_cast<int>(i), spec.halo_px));

    std::vector<float> points(static_cast<std::size_t>(cam.height * cam.width * 3));
    Grid<double> recon(cam.height, cam.width), mono(cam.height, cam.width);
    Grid<std::uint8_t> valid = Grid<std::uint8_t>::Constant(cam.height, cam.width, 1);
    Grid<std::uint8_t> floor = Grid<std::uint8_t>::Zero(cam.height, cam.width);
    for (int r = 0; r < cam.height; ++r)
      for (int c = 0; c < cam.width; ++c) {
        double t = f.depth(r, c);
        // flying pixels: halo pixels land between the object edge and the background
        if (spec.flying_pixels && f.label(r, c) < 0)
          for (std::size_t i = 0; i < masks.size(); ++i)
            if (masks[i](r, c))
              if (const auto fg = nearest_label_depth(f, r, c, static_cast<int>(i), spec.halo_px)) {
                t = *fg + uniform(rng, 0.15, 1.0) * (f.bg_depth(r, c) - *fg);
                break;
              }
        if (f.label(r, c) == kLabelFloor && std::none_of(masks.begin(), masks.end(), [&](const auto& m) { return m(r, c) != 0; }))
          floor(r, c) = BinaryMask::kOn;

        const double recon_depth = std::round(t / spec.scale * 4096.0) / 4096.0;
        recon(r, c) = recon_depth;
        mono(r, c) = static_cast<double>(static_cast<float>(recon_depth) * static_cast<float>(spec.scale));
        if (spec.outlier_fraction > 0 && uniform(rng, 0, 1) < spec.outlier_fraction)
          mono(r, c) = recon_depth * spec.scale * uniform(rng, 0.2, 5.0);
        if (uniform(rng, 0, 1) < 0.005) valid(r, c) = 0;

        Vec3<double> p = cam.eye + t * cam.ray(r, c);
        p += spec.noise * Vec3<double>(gauss(rng), gauss(rng), gauss(rng));
        const Vec3<double> q = spec.tilt * p / spec.scale;
        for (int a = 0; a < 3; ++a) points[static_cast<std::size_t>((r * cam.width + c) * 3 + a)] = static_cast<float>(q(a));
      }

    const std::string stem = "frames/" + fid;
    write_tensor(out_dir / (stem + "_points.vipt"),
                 TensorFile::from_f32({std::uint32_t(cam.height), std::uint32_t(cam.width), 3u}, points));
    write_tensor(out_dir / (stem + "_valid.vipt"), grid_u8(valid));
    write_tensor(out_dir / (stem + "_mono.vipt"), grid_f32(mono));
    write_tensor(out_dir / (stem + "_recon.vipt"), grid_f32(recon));
    manifest.frames.push_back({fid, stem + "_points.vipt", stem + "_valid.vipt", stem + "_mono.vipt", stem + "_recon.vipt"});

    for (std::size_t i = 0; i < masks.size(); ++i) {
      if ((masks[i] == 0).all()) continue;
      const std::string rel = "masks/" + spec.object_ids[i] + "/" + fid + ".vipt";
      write_tensor(out_dir / rel, grid_u8(masks[i]));
      auto& track = manifest.tracks[spec.object_ids[i]];
      track.category = spec.categories[i];
      track.masks[fid] = rel;
    }
    if ((floor != 0).any()) {
      const std::string rel = "masks/floor/" + fid + ".vipt";
      write_tensor(out_dir / rel, grid_u8(floor));
      manifest.floor_masks[fid] = rel;
    }
  }
  write_manifest(out_dir / "manifest.json", manifest);
}

json shape_json(const CatalogEntry& e) {
  return {{"asset_id", e.asset_id}, {"category", e.category}, {"shape", to_string(e.shape.kind)},
          {"canonical_size", vec_json(e.shape.size)}};
}

} // namespace

std::string to_string(AssetShape::Kind kind) {
  switch (kind) {
  case AssetShape::Kind::Box: return "box";
  case AssetShape::Kind::LShape: return "l_shape";
  case AssetShape::Kind::Cylinder: return "cylinder";
  }
  return "unknown";
}

// --- catalog ----------------------------------------------------------------------

std::vector<CatalogEntry> catalog_spec(std::uint64_t seed) {
  using K = AssetShape::Kind;
  struct Base {
    const char* category;
    Vec3<double> size;
    K kind;
  };
  const std::array<Base, 10> bases{{
      {"bed", {2.0, 0.55, 1.5}, K::Box},
      {"sofa", {2.0, 0.85, 0.9}, K::LShape},
      {"wardrobe", {1.4, 2.0, 0.6}, K::Box},
      {"desk", {1.4, 0.75, 0.7}, K::LShape},
      {"nightstand", {0.55, 0.55, 0.4}, K::Box},
      {"chair", {0.6, 0.9, 0.45}, K::Box},
      {"table", {1.6, 0.75, 0.9}, K::Cylinder},
      {"bookshelf", {1.0, 1.8, 0.35}, K::Box},
      {"lamp", {0.5, 1.6, 0.4}, K::Cylinder},
      {"cabinet", {1.0, 0.9, 0.5}, K::LShape},
  }};
  Rng rng(seed);
  std::vector<CatalogEntry> out;
  for (const auto& b : bases)
    for (int variant = 0; variant < 2; ++variant) {
      AssetShape shape;
      shape.kind = variant == 0 ? b.kind : static_cast<K>((static_cast<int>(b.kind) + 1) % 3);
      shape.size = b.size * (variant == 0 ? 1.0 : 0.85);
      for (int a = 0; a < 3; ++a) shape.size(a) *= uniform(rng, 0.92, 1.08);
      shape.size.x() = std::max(shape.size.x(), 1.25 * shape.size.z());
      // round to the millimetre so sizes print cleanly
      shape.size = (shape.size * 1000).array().round() / 1000;
      out.push_back({std::string(b.category) + "_" + std::to_string(variant), b.category, shape});
    }
  return out;
}

PointCloud sample_asset_surface(const AssetShape& shape, int n_points, std::uint64_t seed) {
  const auto parts = shape_parts(shape);
  Rng rng(seed);
  std::vector<Vec3<double>> pts;
  auto keep = [&](std::size_t self, const Vec3<double>& p) {
    for (std::size_t j = 0; j < parts.size(); ++j)
      if (j != self && strictly_inside(parts[j], p)) return false;
    return true;
  };
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (const auto& p : part_extremes(parts[i]))
      if (keep(i, p)) pts.push_back(p);

  double total = 0;
  for (const auto& p : parts) total += part_area(p);
  while (static_cast<int>(pts.size()) < n_points) {
    double u = uniform(rng, 0, total);
    std::size_t i = 0;
    while (i + 1 < parts.size() && u >= part_area(parts[i])) u -= part_area(parts[i++]);
    const Vec3<double> p = sample_part_surface(parts[i], rng);
    if (keep(i, p)) pts.push_back(p);
  }
  PointCloud cloud(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) cloud.col(static_cast<Eigen::Index>(i)) = pts[i].cast<float>().cast<double>();
  return cloud;
}

AssetCatalog make_catalog(std::uint64_t seed) {
  AssetCatalog catalog;
  std::uint64_t k = 0;
  for (const auto& e : catalog_spec(seed)) {
    AssetRecord rec;
    rec.asset_id = e.asset_id;
    rec.category = e.category;
    rec.cloud = sample_asset_surface(e.shape, 1500, seed * 1000 + k++);
    rec.canonical_size = rec.cloud.rowwise().maxCoeff() - rec.cloud.rowwise().minCoeff();
    catalog.add(std::move(rec));
  }
  return catalog;
}

json write_catalog_fixture(const fs::path& out_dir, std::uint64_t seed) {
  write_catalog(out_dir, make_catalog(seed));
  json truth{{"kind", "catalog"}, {"seed", seed}, {"assets", json::array()}};
  for (const auto& e : catalog_spec(seed)) truth["assets"].push_back(shape_json(e));
  write_json(out_dir / "ground_truth.json", truth);
  return truth;
}

// --- room --------------------------------------------------------------------------

json write_room_fixture(const fs::path& out_dir, const RoomFixtureOptions& opts) {
  if (!(opts.scale > 0) || opts.n_frames < 1 || opts.width < 8 || opts.height < 8)
    throw Error(ErrorCode::InvalidConfig, "invalid room fixture options");
  Rng rng(opts.seed);
  const auto spec_entries = catalog_spec(opts.seed);
  auto entry = [&](const std::string& id) {
    return *std::find_if(spec_entries.begin(), spec_entries.end(), [&](const CatalogEntry& e) { return e.asset_id == id; });
  };

  struct Placement {
    const char* asset;
    Vec2<double> xz;
    double theta;
  };
  const std::array<Placement, 5> placements{{
      {"bed_0", {-1.1, -0.8}, 0.10},
      {"nightstand_0", {0.7, -1.3}, 0.0},
      {"sofa_0", {0.8, 1.0}, std::numbers::pi + 0.1},
      {"table_0", {-1.7, 1.25}, 0.20},
      {"wardrobe_0", {1.7, -0.8}, std::numbers::pi / 2 + 0.05},
  }};

  FramesetSpec spec;
  spec.room = {Vec3<double>(-3.5, 0, -3), Vec3<double>(3.5, 2.8, 3)};
  spec.room_polygon = std::vector<Vec2<double>>{{-3.5, -3}, {3.5, -3}, {3.5, 3}, {-3.5, 3}};
  spec.scale = opts.scale;
  spec.tilt = Eigen::AngleAxisd(opts.tilt, Vec3<double>::UnitX()).toRotationMatrix();
  spec.noise = opts.noise;
  spec.outlier_fraction = opts.outlier_fraction;
  spec.halo_px = opts.halo_px;
  spec.description = "A bedroom with a bed, a nightstand, an L-shaped sofa, an oval table and a wardrobe.";

  json truth{{"kind", "room"},        {"seed", opts.seed},   {"scale", opts.scale},
             {"tilt", opts.tilt},     {"noise", opts.noise}, {"outlier_fraction", opts.outlier_fraction},
             {"halo_px", opts.halo_px}, {"objects", json::array()}};
  truth["room"] = json::array();
  for (const auto& v : *spec.room_polygon) truth["room"].push_back({v.x(), v.y()});

  std::vector<Polygon2Dd> footprints;
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const CatalogEntry e = entry(placements[i].asset);
    const Vec2<double> xz = placements[i].xz + Vec2<double>(uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05));
    const double theta = placements[i].theta + uniform(rng, -0.05, 0.05);
    const Vec3<double> center(xz.x(), e.shape.size.y() / 2, xz.y());
    const std::string id = "obj" + std::to_string(i);
    spec.objects.push_back({static_cast<int>(i), center, theta, shape_parts(e.shape)});
    spec.object_ids.push_back(id);
    spec.categories.push_back(e.category);
    footprints.push_back(footprint_rectangle(e.shape.size, xz, theta));
    truth["objects"].push_back({{"object_id", id},
                                {"category", e.category},
                                {"asset_id", e.asset_id},
                                {"shape", to_string(e.shape.kind)},
                                {"center", vec_json(center)},
                                {"size", vec_json(e.shape.size)},
                                {"theta", theta}});
  }
  for (std::size_t i = 0; i < footprints.size(); ++i)
    for (std::size_t j = i + 1; j < footprints.size(); ++j)
      if (polygon_distance(footprints[i], footprints[j]) < 0.1)
        throw Error(ErrorCode::DegenerateInput, "room fixture placement collides for this seed: " +
                                                      std::string(placements[i].asset) + " and " + placements[j].asset);

  for (int k = 0; k < opts.n_frames; ++k) {
    const double a = 2 * std::numbers::pi * k / opts.n_frames + 0.1 + uniform(rng, -0.05, 0.05);
    const Vec3<double> eye(3.1 * std::cos(a), 1.6, 2.6 * std::sin(a));
    spec.cameras.push_back(look_at(eye, Vec3<double>(0, 0.5, 0), std::numbers::pi / 2, opts.width, opts.height));
  }
  write_frameset(out_dir, spec, rng);

  const Mat3<double> tilt = spec.tilt;
  truth["recon_from_metric"] = {{"rotation", {vec_json(tilt.row(0)), vec_json(tilt.row(1)), vec_json(tilt.row(2))}},
                                {"scale", 1 / opts.scale}};
  truth["description"] = spec.description;
  write_json(out_dir / "ground_truth.json", truth);
  return truth;
}

// --- halo ---------------------------------------------------------------------------

json write_halo_fixture(const fs::path& out_dir, const HaloFixtureOptions& opts) {
  Rng rng(opts.seed);
  FramesetSpec spec;
  spec.room = {Vec3<double>(-4, 0, -3), Vec3<double>(4, 3, 4)};
  spec.noise = opts.noise;
  spec.halo_px = opts.halo_px;
  spec.description = "A long low bench in front of a wall.";

  const Vec3<double> size(2.0, 0.5, 0.5);
  const Vec3<double> center(0, size.y() / 2, 0);
  spec.objects.push_back({0, center, 0.0, {Part{false, Vec3<double>::Zero(), size / 2}}});
  spec.object_ids.push_back("obj0");
  spec.categories.push_back("bench");
  // far enough back that the halo ring is a sizeable share of the object
  spec.cameras.push_back(look_at(Vec3<double>(0, 0.6, 3.3), Vec3<double>(0, 0.25, 0), std::numbers::pi / 3, opts.width,
                                 opts.height));
  write_frameset(out_dir, spec, rng);

  json truth{{"kind", "halo"},   {"seed", opts.seed},
             {"halo_px", opts.halo_px}, {"scale", 1.0},
             {"objects", {{{"object_id", "obj0"}, {"category", "bench"}, {"center", vec_json(center)},
                           {"size", vec_json(size)}, {"theta", 0.0}}}}};
  write_json(out_dir / "ground_truth.json", truth);
  return truth;
}

// --- collision scenes ---------------------------------------------------------------------

SceneLayout make_collision_scene(std::uint64_t seed, int max_objects) {
  Rng rng(seed);
  const double w = uniform(rng, 5, 8), d = uniform(rng, 4, 6.5);
  // rectangle with randomly cut corners
  std::vector<Vec2<double>> room_pts;
  const std::array<Vec2<double>, 4> corners{{{-w / 2, -d / 2}, {w / 2, -d / 2}, {w / 2, d / 2}, {-w / 2, d / 2}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2<double>& prev = corners[(i + 3) % 4];
    const Vec2<double>& cur = corners[i];
    const Vec2<double>& next = corners[(i + 1) % 4];
    const double cut = uniform(rng, 0, 0.8);
    if (cut < 0.2) {
      room_pts.push_back(cur);
      continue;
    }
    room_pts.push_back(cur + (prev - cur).normalized() * cut);
    room_pts.push_back(cur + (next - cur).normalized() * cut);
  }
  SceneLayout layout;
  layout.room = Polygon2Dd(room_pts);
  const double room_area = polygon_area(*layout.room);

  const int n_target = std::uniform_int_distribution<int>(5, std::max(5, max_objects))(rng);
  std::vector<PlacedObject> placed;
  double used_area = 0;
  for (int i = 0; i < n_target; ++i) {
    const double ow = uniform(rng, 0.4, 1.8);
    const double od = uniform(rng, 0.3, std::min(ow, 1.0));
    const bool mounted = uniform(rng, 0, 1) < 0.15;
    const double oh = mounted ? uniform(rng, 0.3, 0.8) : uniform(rng, 0.4, 2.0);
    const double y_min = mounted ? uniform(rng, 1.2, 1.6) : 0.0;
    const double theta = uniform(rng, 0, 2 * std::numbers::pi);
    if (used_area + ow * od > 0.3 * room_area) break;

    char id[16];
    std::snprintf(id, sizeof id, "o%02d", i);
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const Vec2<double> p(uniform(rng, -w / 2, w / 2), uniform(rng, -d / 2, d / 2));
      PlacedObject cand(id, mounted ? "shelf" : "box", Vec3<double>(ow, oh, od), p, theta, y_min, y_min + oh);
      if (object_boundary_loss(cand, *layout.room) > 0) continue;
      const bool clear = std::all_of(placed.begin(), placed.end(), [&](const PlacedObject& o) {
        const bool stacked = o.y_max < cand.y_min || cand.y_max < o.y_min;
        return stacked || polygon_distance(o.footprint(), cand.footprint()) >= 0.05;
      });
      if (!clear) continue;
      placed.push_back(std::move(cand));
      used_area += ow * od;
      break;
    }
  }

  // push every object off its feasible spot; the pushed spot is its anchor
  for (auto& o : placed) {
    const double angle = uniform(rng, 0, 2 * std::numbers::pi), dist = uniform(rng, 0.15, 0.6);
    const Vec2<double> anchor = o.position() + dist * Vec2<double>(std::cos(angle), std::sin(angle));
    o = PlacedObject(o.object_id, o.category, o.size, anchor, o.theta, o.y_min, o.y_max);
  }
  layout.objects = std::move(placed);
  layout.sort_objects();
  return layout;
}

json write_collision_fixture(const fs::path& out_dir, std::uint64_t seed) {
  LayoutDocument doc;
  doc.description = "Seeded colliding layout";
  doc.layout = make_collision_scene(seed);
  for (const auto& o : doc.layout.objects) doc.assets[o.object_id] = std::nullopt;
  write_layout(out_dir / "layout.json", doc);
  const json truth{{"kind", "collision-scene"},
                   {"seed", seed},
                   {"objects", doc.layout.objects.size()},
                   {"initial_overlap", overlap_loss(doc.layout)},
                   {"initial_boundary", boundary_loss(doc.layout)}};
  write_json(out_dir / "ground_truth.json", truth);
  return truth;
}

json gen_fixture(const std::string& kind, std::uint64_t seed, const fs::path& out_dir) {
  if (kind == "room") {
    RoomFixtureOptions opts;
    opts.seed = seed;
    return write_room_fixture(out_dir, opts);
  }
  if (kind == "halo") {
    HaloFixtureOptions opts;
    opts.seed = seed;
    return write_halo_fixture(out_dir, opts);
  }
  if (kind == "catalog") return write_catalog_fixture(out_dir, seed);
  if (kind == "collision-scene") return write_collision_fixture(out_dir, seed);
  throw Error(ErrorCode::UnknownKind, "unknown fixture kind: " + kind);
}

} // namespace vipscene
