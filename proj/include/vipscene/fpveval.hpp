#pragma once

// First-person-view scoring: 360° sweeps of box-proxy renders, stacked
// summaries, judge prompts, rank parsing and rank correlation.

#include "vipscene/image.hpp"
#include "vipscene/scene.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace vipscene {

struct SweepSpec {
  Vec3<double> center = Vec3<double>::Zero();
  int n_views = 12;
  double eye_height = 1.5;
  double fov = 1.2;
  int width = 256;
  int height = 256;
};

/// n_views poses at center + (0, eye_height, 0), yaw = 2πk/n, pitch 0.
/// Throws DegenerateInput if n_views < 2.
std::vector<CameraPose> sweep_poses(const SweepSpec& spec);

/// Horizontal center of the scene: the room centroid, else the middle of the
/// object footprints' bounding box, else the origin. Height is the floor (0).
Vec3<double> sweep_center(const SceneDocument& doc);

std::vector<RasterImage> render_sweep(const SceneDocument& doc, const SweepSpec& spec);

struct MethodViews {
  std::string method_name;
  std::vector<RasterImage> sweep_images;
};

struct EvalBundle {
  std::string bundle_id;
  std::string description;
  std::vector<MethodViews> methods;
};

/// One row per method (top to bottom), views left to right.
/// Throws ShapeMismatch if view counts or view sizes differ.
RasterImage compose_summary(const EvalBundle& bundle);

// --- prompts -------------------------------------------------------------------------

inline constexpr const char* kDescriptionPlaceholder = "{text_description}";

/// Judge prompt for stacked first-person sweeps of `method_count` methods.
std::string build_fpv_prompt(const std::string& description, int method_count = 3);
/// Judge prompt for side-by-side top-down renders.
std::string build_topdown_prompt(const std::string& description, int method_count = 3);

// --- replies -------------------------------------------------------------------------

inline constexpr std::array<const char*, 3> kCriteria{"semantic_correctness", "layout_correctness",
                                                      "overall_preference"};

/// ranks(m, c) is the rank of method m under criterion c, 1 = best.
struct RankMatrix {
  Eigen::Matrix<int, Eigen::Dynamic, 3> ranks;
  std::array<bool, 3> ties{false, false, false}; ///< a criterion's column is not a permutation

  Eigen::Index method_count() const { return ranks.rows(); }
  friend bool operator==(const RankMatrix& a, const RankMatrix& b) {
    return a.ranks.rows() == b.ranks.rows() && a.ranks == b.ranks && a.ties == b.ties;
  }
};

/// Reads the block after the last "Final answer:" (any case): one line per
/// method, each with exactly three ranks in 1..method_count.
/// Errors: MissingMarker, ParseFailure (message carries the offending line).
RankMatrix parse_rankings(const std::string& reply, int method_count = 3);

/// One line of method_count ranks after the marker. Errors as above.
std::vector<int> parse_topdown_ranking(const std::string& reply, int method_count = 3);

/// Renders a matrix in the reply format the judge is asked for.
std::string build_reply(const RankMatrix& matrix);

/// method_count + 1 − rank, so the best method scores method_count.
Eigen::Matrix<int, Eigen::Dynamic, 3> rank_scores(const RankMatrix& matrix);

// --- rank correlation -----------------------------------------------------------------

enum class TauVariant { A, B };

/// Kendall's tau of two paired lists; tau-b corrects for ties. Returns nullopt
/// when undefined (a list with every value tied, or fewer than two items).
/// Throws LengthMismatch on unequal or empty inputs.
std::optional<double> kendall_tau(const std::vector<double>& a, const std::vector<double>& b,
                                  TauVariant variant = TauVariant::B);

} // namespace vipscene
