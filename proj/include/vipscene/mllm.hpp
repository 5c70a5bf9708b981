#pragma once

// Judge-model client and the evaluation report built on top of it.

#include "vipscene/fpveval.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace vipscene {

struct MllmClientConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string token_env = "OPENAI_API_KEY"; ///< name of the variable holding the bearer token
  double timeout_s = 120;
  int max_retries = 2;
  int concurrency = 4;
};

struct MllmRequest {
  std::string request_id;
  std::vector<std::string> png_images; ///< encoded PNG bytes
  std::string prompt;
};

/// One request in, one text reply out. Failures throw Error(TransportError).
class Transport {
public:
  virtual ~Transport() = default;
  virtual std::string complete(const MllmRequest& request) = 0;
};

/// Chat-completions style JSON over HTTP(S).
class HttpTransport : public Transport {
public:
  explicit HttpTransport(MllmClientConfig config);
  std::string complete(const MllmRequest& request) override;

private:
  MllmClientConfig config_;
};

/// Serves `<dir>/<request_id>.txt`; a missing file is a transport error.
class ReplayTransport : public Transport {
public:
  explicit ReplayTransport(std::filesystem::path dir);
  std::string complete(const MllmRequest& request) override;

private:
  std::filesystem::path dir_;
};

class MllmClient {
public:
  /// Throws InvalidConfig if retries < 0 or concurrency < 1.
  MllmClient(std::shared_ptr<Transport> transport, MllmClientConfig config);

  /// Tries up to max_retries + 1 times, then rethrows the last error.
  std::string call(const MllmRequest& request) const;
  const MllmClientConfig& config() const { return config_; }

private:
  std::shared_ptr<Transport> transport_;
  MllmClientConfig config_;
};

/// Scores every bundle: summary → prompt → judge → parsed ranks. Bundles whose
/// reply cannot be parsed are reported and left out of the means; transport
/// errors propagate. Bundles run concurrently up to the client's cap; the
/// report does not depend on completion order.
nlohmann::json evaluate(const std::vector<EvalBundle>& bundles, const MllmClient& client);

/// Reads {"bundles": [{"bundle_id", "description", "methods": [{"name", "scene"}]}]}
/// with scene paths relative to the file, and renders every scene's sweep
/// around its own sweep_center. Errors: MissingFile, InvalidDocument.
std::vector<EvalBundle> load_eval_bundles(const std::filesystem::path& path, const SweepSpec& sweep);

// --- human ratings ------------------------------------------------------------------

struct HumanRating {
  std::string scene_id;
  std::string method;
  std::string criterion; ///< one of kCriteria
  int rank = 0;
};

/// CSV with the header `scene_id,method,criterion,rank`.
std::vector<HumanRating> read_human_ratings(const std::filesystem::path& path);

/// Kendall's tau per criterion between human ranks and the ranks in an
/// evaluation report, over the (scene, method) pairs present in both.
nlohmann::json tau_against_report(const std::vector<HumanRating>& ratings, const nlohmann::json& report,
                                  TauVariant variant = TauVariant::B);

} // namespace vipscene
