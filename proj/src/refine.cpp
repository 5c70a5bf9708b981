#include "vipscene/refine.hpp"

#include "vipscene/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vipscene {

Polygon2Dd footprint_rectangle(const Vec3<double>& size, const Vec2<double>& position, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double hw = size.x() / 2, hd = size.z() / 2;
  std::vector<Vec2<double>> corners;
  corners.reserve(4);
  for (const auto& [lx, lz] : {std::pair{-hw, -hd}, std::pair{hw, -hd}, std::pair{hw, hd}, std::pair{-hw, hd}})
    corners.emplace_back(position.x() + c * lx + s * lz, position.y() - s * lx + c * lz);
  return Polygon2Dd(std::move(corners));
}

PlacedObject::PlacedObject(std::string id, std::string cat, Vec3<double> sz, Vec2<double> position, double yaw,
                           double ymin, double ymax)
    : object_id(std::move(id)), category(std::move(cat)), size(std::move(sz)), original_position(position),
      theta(yaw), y_min(ymin), y_max(ymax) {
  set_position(position);
}

void PlacedObject::set_position(const Vec2<double>& p) {
  position_ = p;
  footprint_ = footprint_rectangle(size, position_, theta);
}

void SceneLayout::sort_objects() {
  std::stable_sort(objects.begin(), objects.end(),
                   [](const PlacedObject& a, const PlacedObject& b) { return a.object_id < b.object_id; });
}

Eigen::VectorXd SceneLayout::positions() const {
  Eigen::VectorXd flat(2 * static_cast<Eigen::Index>(objects.size()));
  for (std::size_t i = 0; i < objects.size(); ++i) flat.segment<2>(2 * Eigen::Index(i)) = objects[i].position();
  return flat;
}

void SceneLayout::set_positions(const Eigen::VectorXd& flat) {
  for (std::size_t i = 0; i < objects.size(); ++i) objects[i].set_position(flat.segment<2>(2 * Eigen::Index(i)));
}

// --- losses ----------------------------------------------------------------------

double position_loss(const SceneLayout& layout) {
  double sum = 0;
  for (const auto& o : layout.objects) sum += (o.position() - o.original_position).squaredNorm();
  return sum;
}

double pair_overlap(const PlacedObject& a, const PlacedObject& b) {
  if (a.y_max < b.y_min || b.y_max < a.y_min) return 0;
  const auto [alo, ahi] = a.footprint().bounds();
  const auto [blo, bhi] = b.footprint().bounds();
  if ((ahi.array() < blo.array()).any() || (bhi.array() < alo.array()).any()) return 0;
  return polygon_area(convex_clip(a.footprint(), b.footprint()));
}

double overlap_loss(const SceneLayout& layout) {
  double sum = 0;
  for (std::size_t i = 0; i < layout.objects.size(); ++i)
    for (std::size_t j = i + 1; j < layout.objects.size(); ++j) sum += pair_overlap(layout.objects[i], layout.objects[j]);
  return sum;
}

double object_boundary_loss(const PlacedObject& object, const Polygon2Dd& room) {
  const double area = polygon_area(object.footprint());
  const double inside = polygon_area(convex_clip(object.footprint(), room));
  double loss = std::max(0.0, area - inside);
  if (inside <= 0) loss += area * polygon_distance(object.footprint(), room);
  return loss;
}

double boundary_loss(const SceneLayout& layout) {
  if (!layout.room) return 0;
  double sum = 0;
  for (const auto& o : layout.objects) sum += object_boundary_loss(o, *layout.room);
  return sum;
}

TotalLoss total_loss(const SceneLayout& layout, const RefineConfig& cfg) {
  TotalLoss t;
  t.components = {position_loss(layout), overlap_loss(layout), boundary_loss(layout)};
  t.value = t.components.position + cfg.lambda_o * t.components.overlap + cfg.lambda_b * t.components.boundary;
  return t;
}

namespace {

// Every L_total term that depends on object i.
double object_terms(const SceneLayout& layout, std::size_t i, const RefineConfig& cfg) {
  const PlacedObject& o = layout.objects[i];
  double value = (o.position() - o.original_position).squaredNorm();
  if (cfg.lambda_o != 0) {
    double overlap = 0;
    for (std::size_t j = 0; j < layout.objects.size(); ++j)
      if (j != i) overlap += pair_overlap(o, layout.objects[j]);
    value += cfg.lambda_o * overlap;
  }
  if (cfg.lambda_b != 0 && layout.room) value += cfg.lambda_b * object_boundary_loss(o, *layout.room);
  return value;
}

bool violations_cleared(const LossComponents& c, const RefineConfig& cfg) {
  return c.overlap <= cfg.eps_area && c.boundary <= cfg.eps_area;
}

} // namespace

Eigen::VectorXd loss_gradient(const SceneLayout& layout, const RefineConfig& cfg) {
  SceneLayout probe = layout;
  Eigen::VectorXd grad(2 * static_cast<Eigen::Index>(layout.objects.size()));
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const Vec2<double> base = layout.objects[i].position();
    for (int axis = 0; axis < 2; ++axis) {
      Vec2<double> p = base;
      p(axis) = base(axis) + cfg.fd_step;
      probe.objects[i].set_position(p);
      const double plus = object_terms(probe, i, cfg);
      p(axis) = base(axis) - cfg.fd_step;
      probe.objects[i].set_position(p);
      const double minus = object_terms(probe, i, cfg);
      grad(2 * Eigen::Index(i) + axis) = (plus - minus) / (2 * cfg.fd_step);
    }
    probe.objects[i].set_position(base);
  }
  return grad;
}

std::string to_string(Termination t) {
  switch (t) {
  case Termination::Eliminated: return "eliminated";
  case Termination::Stalled: return "stalled";
  case Termination::MaxIters: return "max_iters";
  }
  return "unknown";
}

nlohmann::json to_json(const RefineReport& r) {
  auto components = [](const LossComponents& c) {
    return nlohmann::json{{"L_p", c.position}, {"L_o", c.overlap}, {"L_b", c.boundary}};
  };
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["reason"] = to_string(r.reason);
  j["initial_loss"] = r.initial_loss;
  j["final_loss"] = r.final_loss;
  j["initial_components"] = components(r.initial);
  j["final_components"] = components(r.final);
  j["displacement"] = nlohmann::json::object();
  for (const auto& [id, d] : r.displacement) j["displacement"][id] = d;
  j["loss_trace"] = r.loss_trace;
  return j;
}

std::pair<SceneLayout, RefineReport> refine_layout(SceneLayout layout, const RefineConfig& cfg) {
  layout.sort_objects();
  RefineReport report;
  TotalLoss current = total_loss(layout, cfg);
  report.initial = current.components;
  report.initial_loss = current.value;
  report.loss_trace.push_back(current.value);

  if (violations_cleared(current.components, cfg)) {
    report.reason = Termination::Eliminated;
  } else {
    Eigen::VectorXd x = layout.positions();
    report.reason = Termination::MaxIters;
    for (int it = 1; it <= cfg.max_iters; ++it) {
      report.iterations = it;
      const Eigen::VectorXd grad = loss_gradient(layout, cfg);

      // backtracking: halve the step until the loss drops
      bool accepted = false;
      double eta = cfg.step;
      for (int h = 0; h <= cfg.max_halvings; ++h, eta /= 2) {
        const Eigen::VectorXd candidate = x - eta * grad;
        layout.set_positions(candidate);
        const TotalLoss trial = total_loss(layout, cfg);
        if (trial.value < current.value) {
          x = candidate;
          current = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        layout.set_positions(x);
        report.reason = Termination::Stalled;
        break;
      }
      report.loss_trace.push_back(current.value);
      if (violations_cleared(current.components, cfg)) {
        report.reason = Termination::Eliminated;
        break;
      }
      const std::size_t n = report.loss_trace.size();
      if (it >= cfg.stall_window &&
          report.loss_trace[n - 1 - std::size_t(cfg.stall_window)] - report.loss_trace[n - 1] < cfg.stall_delta) {
        report.reason = Termination::Stalled;
        break;
      }
    }
  }

  report.final = current.components;
  report.final_loss = current.value;
  for (const auto& o : layout.objects)
    report.displacement.emplace_back(o.object_id, (o.position() - o.original_position).norm());
  return {std::move(layout), std::move(report)};
}

} // namespace vipscene

namespace vipscene {

using nlohmann::json;

json to_json(const LayoutDocument& doc) {
  json j;
  j["schema_version"] = 1;
  j["description"] = doc.description;
  j["ground"] = {{"normal", {doc.layout.ground.normal.x(), doc.layout.ground.normal.y(), doc.layout.ground.normal.z()}},
                 {"offset", doc.layout.ground.offset}};
  if (doc.layout.room) {
    j["room"] = json::array();
    for (const auto& v : doc.layout.room->vertices()) j["room"].push_back({v.x(), v.y()});
  } else {
    j["room"] = nullptr;
  }
  j["objects"] = json::array();
  for (const auto& o : doc.layout.objects) {
    const auto it = doc.assets.find(o.object_id);
    j["objects"].push_back({{"object_id", o.object_id},
                            {"category", o.category},
                            {"asset_id", it != doc.assets.end() && it->second ? json(*it->second) : json(nullptr)},
                            {"size", {o.size.x(), o.size.y(), o.size.z()}},
                            {"position", {o.position().x(), o.position().y()}},
                            {"original_position", {o.original_position.x(), o.original_position.y()}},
                            {"theta", o.theta},
                            {"y_min", o.y_min},
                            {"y_max", o.y_max}});
  }
  return j;
}

LayoutDocument layout_from_json(const json& j) {
  LayoutDocument doc;
  try {
    if (j.at("schema_version").get<int>() != 1) throw Error(ErrorCode::InvalidDocument, "unsupported schema_version");
    doc.description = j.value("description", std::string());
    if (j.contains("ground")) {
      const auto n = j["ground"].at("normal").get<std::vector<double>>();
      if (n.size() != 3) throw Error(ErrorCode::InvalidDocument, "ground normal needs 3 values");
      doc.layout.ground.normal = Vec3<double>(n[0], n[1], n[2]).normalized();
      doc.layout.ground.offset = j["ground"].at("offset").get<double>();
    }
    if (j.contains("room") && !j["room"].is_null()) {
      std::vector<Vec2<double>> room;
      for (const auto& v : j["room"]) room.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      Polygon2Dd poly(std::move(room));
      if (!poly.is_convex()) throw Error(ErrorCode::NonConvexInput, "room polygon is not convex");
      doc.layout.room = std::move(poly);
    }
    for (const auto& o : j.at("objects")) {
      const auto size = o.at("size").get<std::vector<double>>();
      const auto pos = o.at("position").get<std::vector<double>>();
      const auto orig = o.contains("original_position") ? o["original_position"].get<std::vector<double>>() : pos;
      if (size.size() != 3 || pos.size() != 2 || orig.size() != 2)
        throw Error(ErrorCode::InvalidDocument, "object size needs 3 values and positions 2");
      PlacedObject p(o.at("object_id").get<std::string>(), o.at("category").get<std::string>(),
                     Vec3<double>(size[0], size[1], size[2]), Vec2<double>(orig[0], orig[1]), o.at("theta").get<double>(),
                     o.at("y_min").get<double>(), o.at("y_max").get<double>());
      p.set_position(Vec2<double>(pos[0], pos[1]));
      doc.assets[p.object_id] = o.contains("asset_id") && !o["asset_id"].is_null()
                                    ? std::optional<std::string>(o["asset_id"].get<std::string>())
                                    : std::nullopt;
      doc.layout.objects.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, e.what());
  }
  doc.layout.sort_objects();
  return doc;
}

LayoutDocument read_layout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  try {
    return layout_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, path.string() + ": " + e.what());
  }
}

void write_layout(const std::filesystem::path& path, const LayoutDocument& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << to_json(doc).dump(2) << "\n";
}

} // namespace vipscene
