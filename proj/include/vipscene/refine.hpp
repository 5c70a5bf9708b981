#pragma once

// Collision-resolving layout refinement: gradient descent on
//   L_total = L_p + λ_o·L_o + λ_b·L_b
// over the horizontal positions of the placed objects.

#include "vipscene/geom.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vipscene {

class PlacedObject {
public:
  PlacedObject() = default;
  /// `size` is (width, height, depth) in the object's yaw frame.
  PlacedObject(std::string object_id, std::string category, Vec3<double> size, Vec2<double> position, double theta,
               double y_min, double y_max);

  std::string object_id;
  std::string category;
  Vec3<double> size = Vec3<double>::Ones();
  Vec2<double> original_position = Vec2<double>::Zero(); ///< (x, z)
  double theta = 0;                                      ///< resolved yaw, fixed during refinement
  double y_min = 0, y_max = 1;

  const Vec2<double>& position() const { return position_; }
  void set_position(const Vec2<double>& p);
  const Polygon2Dd& footprint() const { return footprint_; }

private:
  Vec2<double> position_ = Vec2<double>::Zero();
  Polygon2Dd footprint_;
};

/// Rectangle covered by a box of `size` at (x, z) = `position` and yaw `theta`.
Polygon2Dd footprint_rectangle(const Vec3<double>& size, const Vec2<double>& position, double theta);

struct SceneLayout {
  std::vector<PlacedObject> objects; ///< kept sorted by object_id
  std::optional<Polygon2Dd> room;
  Planed ground;

  void sort_objects();
  Eigen::VectorXd positions() const; ///< 2N vector (x0, z0, x1, z1, …)
  void set_positions(const Eigen::VectorXd& flat);
};

struct RefineConfig {
  double lambda_o = 10;
  double lambda_b = 10;
  double step = 0.01;
  double fd_step = 1e-3;
  int max_iters = 2000;
  double eps_area = 1e-6;
  int stall_window = 50;
  double stall_delta = 1e-8;
  int max_halvings = 10;
};

struct LossComponents {
  double position = 0; ///< L_p
  double overlap = 0;  ///< L_o
  double boundary = 0; ///< L_b
};

struct TotalLoss {
  double value = 0;
  LossComponents components;
};

double position_loss(const SceneLayout& layout);

/// Footprint intersection area of an unordered pair; 0 when their vertical
/// extents are separated by a positive gap.
double pair_overlap(const PlacedObject& a, const PlacedObject& b);
double overlap_loss(const SceneLayout& layout);

/// Area of a footprint outside the room. A footprint that misses the room
/// entirely additionally pays area·distance so it keeps a slope toward it.
double object_boundary_loss(const PlacedObject& object, const Polygon2Dd& room);
double boundary_loss(const SceneLayout& layout);

TotalLoss total_loss(const SceneLayout& layout, const RefineConfig& cfg);

/// Central finite differences of L_total, one coordinate at a time. Only the
/// terms that involve the perturbed object are re-evaluated.
Eigen::VectorXd loss_gradient(const SceneLayout& layout, const RefineConfig& cfg);

enum class Termination { Eliminated, Stalled, MaxIters };
std::string to_string(Termination t);

struct RefineReport {
  int iterations = 0;
  Termination reason = Termination::MaxIters;
  LossComponents initial;
  LossComponents final;
  double initial_loss = 0;
  double final_loss = 0;
  std::vector<double> loss_trace;
  std::vector<std::pair<std::string, double>> displacement; ///< object_id → ‖l − l_orig‖
};

nlohmann::json to_json(const RefineReport& report);

std::pair<SceneLayout, RefineReport> refine_layout(SceneLayout layout, const RefineConfig& cfg);

// --- layout files ----------------------------------------------------------------

/// A layout plus the asset chosen for each object (nullopt when none was).
struct LayoutDocument {
  std::string description;
  SceneLayout layout;
  std::map<std::string, std::optional<std::string>> assets;
};

nlohmann::json to_json(const LayoutDocument& doc);
/// Throws InvalidDocument on schema errors and NonConvexInput for a bad room.
LayoutDocument layout_from_json(const nlohmann::json& j);
LayoutDocument read_layout(const std::filesystem::path& path);
void write_layout(const std::filesystem::path& path, const LayoutDocument& doc);

} // namespace vipscene
