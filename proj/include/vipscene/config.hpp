#pragma once

#include "vipscene/decompose.hpp"
#include "vipscene/fpveval.hpp"
#include "vipscene/mllm.hpp"
#include "vipscene/orient.hpp"
#include "vipscene/refine.hpp"
#include "vipscene/retrieve.hpp"

#include <filesystem>
#include <string>

namespace vipscene {

struct PipelineConfig {
  ErosionConfig erosion;
  bool erosion_enabled = true;
  ObbConfig obb;
  RetrieveConfig retrieve;
  RefineConfig refine;
  SweepSpec sweep;
  int topdown_size = 512;
  MllmClientConfig mllm;
  TauVariant tau = TauVariant::B;
  int workers = 1;
};

/// Key-value file in `[section]` blocks:
///
///   [refine]
///   lambda_o = 10      # comment
///   [mllm]
///   model = "gpt-4o"
///
/// Keys left out keep their defaults; unknown sections or keys, malformed
/// lines and out-of-range values throw InvalidConfig.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The full configuration in the same format; parse_config inverts it.
std::string dump_config(const PipelineConfig& cfg);

} // namespace vipscene
