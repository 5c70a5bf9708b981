#pragma once

// End-to-end wiring: load → rescale → floor plane → extract → orient →
// retrieve → refine → export. Every stage is also callable on its own so the
// CLI can chain stages through files.

#include "vipscene/config.hpp"
#include "vipscene/error.hpp"
#include "vipscene/scene.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vipscene {

/// A library error annotated with the stage that raised it.
class StageError : public Error {
public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + strip_code(cause)), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  static std::string strip_code(const Error& e);
  std::string stage_;
};

struct IngestResult {
  FrameSet frames;          ///< rescaled to metric units
  double scale = 1;
  Planed ground;            ///< floor plane in the rescaled reconstruction frame
  bool floor_fallback = false;
};

/// Errors are tagged "ingest".
IngestResult ingest_stage(const std::filesystem::path& manifest, const PipelineConfig& cfg);

/// Extracted objects with their scene context. Clouds live in the rescaled
/// reconstruction frame, like `ground`.
struct ObjectSet {
  std::string description;
  double scale = 1;
  Planed ground;
  std::optional<Polygon2Dd> room; ///< gravity-aligned frame
  std::vector<ObjectInstance> objects;
};

ObjectSet extract_stage(const IngestResult& ingest, const PipelineConfig& cfg);
void orient_stage(ObjectSet& set, const PipelineConfig& cfg);

/// Per-object retrieval outcome; `asset_id` is empty for unmatched objects.
struct RetrievalRecord {
  std::string object_id;
  std::optional<std::string> asset_id;
  double rmse = 0;
  bool flipped = false;
  std::vector<CandidateScore> scores;
};

/// Builds the unrefined layout in the gravity-aligned frame. Objects whose
/// category has no asset keep their OBB and get no asset.
LayoutDocument retrieve_stage(const ObjectSet& set, const AssetCatalog& catalog, const PipelineConfig& cfg,
                              std::vector<RetrievalRecord>* records = nullptr);

struct PipelineResult {
  SceneDocument scene;
  RefineReport refine;
  LayoutDocument layout; ///< before refinement
  std::vector<RetrievalRecord> retrieval;
  double scale = 1;
};

/// Runs every stage and writes scene.json, refine_report.json, layout.json
/// and retrieval.json into out_dir. Errors are StageErrors.
PipelineResult run_pipeline(const std::filesystem::path& manifest, const std::filesystem::path& catalog_dir,
                            const PipelineConfig& cfg, const std::filesystem::path& out_dir);

// --- stage files ----------------------------------------------------------------------

/// objects.json plus one cloud tensor per object under `objects/`.
void write_object_set(const std::filesystem::path& out_dir, const ObjectSet& set);
ObjectSet read_object_set(const std::filesystem::path& objects_json);

nlohmann::json to_json(const std::vector<RetrievalRecord>& records);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace vipscene
