#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vipscene/mllm.hpp"

#include "vipscene/error.hpp"
#include "vipscene/log.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

namespace vipscene {

using nlohmann::json;

HttpTransport::HttpTransport(MllmClientConfig config) : config_(std::move(config)) {}

std::string HttpTransport::complete(const MllmRequest& request) {
  // split "scheme://host[:port]/path"
  const std::size_t scheme_end = config_.endpoint.find("://");
  const std::size_t path_start =
      config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (scheme_end == std::string::npos || path_start == std::string::npos)
    throw Error(ErrorCode::InvalidConfig, "endpoint must look like scheme://host/path: " + config_.endpoint);
  httplib::Client http(config_.endpoint.substr(0, path_start));
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(config_.timeout_s * 1000));
  http.set_connection_timeout(timeout);
  http.set_read_timeout(timeout);
  http.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  for (const auto& png : request.png_images)
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  const json body{{"model", config_.model},
                  {"temperature", 0},
                  {"messages", json::array({{{"role", "user"}, {"content", content}}})}};

  const auto res = http.Post(config_.endpoint.substr(path_start), headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::TransportError, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorCode::TransportError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  try {
    return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("unexpected response body: ") + e.what());
  }
}

ReplayTransport::ReplayTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ReplayTransport::complete(const MllmRequest& request) {
  std::ifstream in(dir_ / (request.request_id + ".txt"), std::ios::binary);
  if (!in) throw Error(ErrorCode::TransportError, "no recorded reply for " + request.request_id);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

MllmClient::MllmClient(std::shared_ptr<Transport> transport, MllmClientConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {
  if (!transport_) throw Error(ErrorCode::InvalidConfig, "client needs a transport");
  if (config_.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be ≥ 0");
  if (config_.concurrency < 1) throw Error(ErrorCode::InvalidConfig, "concurrency must be ≥ 1");
}

std::string MllmClient::call(const MllmRequest& request) const {
  for (int attempt = 0;; ++attempt) {
    try {
      return transport_->complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TransportError || attempt >= config_.max_retries) throw;
      log_event("mllm_retry", {{"request_id", request.request_id}, {"attempt", attempt + 1}, {"error", e.what()}});
    }
  }
}

// --- evaluation -------------------------------------------------------------------------

namespace {

json evaluate_bundle(const EvalBundle& bundle, const MllmClient& client) {
  const RasterImage summary = compose_summary(bundle);
  const int m = static_cast<int>(bundle.methods.size());
  MllmRequest request{bundle.bundle_id, {encode_png(summary)}, build_fpv_prompt(bundle.description, m)};
  const std::string reply = client.call(request);

  json out;
  out["bundle_id"] = bundle.bundle_id;
  out["methods"] = json::array();
  for (const auto& method : bundle.methods) out["methods"].push_back(method.method_name);
  out["summary_size"] = {summary.width, summary.height};
  out["raw_reply"] = reply;
  try {
    const RankMatrix ranks = parse_rankings(reply, m);
    const auto scores = rank_scores(ranks);
    out["ranks"] = json::array();
    out["scores"] = json::object();
    for (int i = 0; i < m; ++i) {
      out["ranks"].push_back({ranks.ranks(i, 0), ranks.ranks(i, 1), ranks.ranks(i, 2)});
      out["scores"][bundle.methods[static_cast<std::size_t>(i)].method_name] = {scores(i, 0), scores(i, 1),
                                                                               scores(i, 2)};
    }
    out["ties"] = ranks.ties;
    out["failure"] = nullptr;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ParseFailure && e.code() != ErrorCode::MissingMarker) throw;
    out["failure"] = e.what();
    log_event("bundle_excluded", {{"level", "warning"}, {"bundle_id", bundle.bundle_id}, {"error", e.what()}});
  }
  return out;
}

} // namespace

json evaluate(const std::vector<EvalBundle>& bundles, const MllmClient& client) {
  std::vector<json> results(bundles.size());
  std::vector<std::exception_ptr> errors(bundles.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < bundles.size(); i = next++) {
      try {
        results[i] = evaluate_bundle(bundles[i], client);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(client.config().concurrency), std::max<std::size_t>(1, bundles.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // per-method means over the bundles that parsed
  std::map<std::string, std::array<double, 3>> sums;
  std::map<std::string, int> counts;
  int used = 0;
  for (const auto& r : results) {
    if (!r["failure"].is_null()) continue;
    ++used;
    for (const auto& [method, s] : r["scores"].items()) {
      auto& acc = sums[method];
      for (std::size_t c = 0; c < 3; ++c) acc[c] += s[c].get<double>();
      ++counts[method];
    }
  }
  json means = json::object();
  for (const auto& [method, acc] : sums)
    means[method] = {acc[0] / counts[method], acc[1] / counts[method], acc[2] / counts[method]};

  json report;
  report["schema_version"] = 1;
  report["criteria"] = kCriteria;
  report["score_rule"] = "method_count + 1 - rank";
  report["bundles"] = results;
  report["aggregate"] = {{"bundles_used", used},
                         {"bundles_failed", static_cast<int>(results.size()) - used},
                         {"mean_scores", means}};
  return report;
}

std::vector<EvalBundle> load_eval_bundles(const std::filesystem::path& path, const SweepSpec& sweep) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<EvalBundle> bundles;
  try {
    const json j = json::parse(in);
    for (const auto& jb : j.at("bundles")) {
      EvalBundle b;
      b.bundle_id = jb.at("bundle_id").get<std::string>();
      b.description = jb.at("description").get<std::string>();
      for (const auto& jm : jb.at("methods")) {
        const SceneDocument doc = read_scene(path.parent_path() / jm.at("scene").get<std::string>());
        SweepSpec spec = sweep;
        spec.center = sweep_center(doc);
        b.methods.push_back({jm.at("name").get<std::string>(), render_sweep(doc, spec)});
      }
      bundles.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, path.string() + ": " + e.what());
  }
  return bundles;
}

// --- human ratings -------------------------------------------------------------------------

std::vector<HumanRating> read_human_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "scene_id,method,criterion,rank")
    throw Error(ErrorCode::InvalidDocument, "ratings header must be scene_id,method,criterion,rank");

  std::vector<HumanRating> out;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 4) throw Error(ErrorCode::InvalidDocument, where + ": expected 4 columns");
    if (std::find(kCriteria.begin(), kCriteria.end(), cells[2]) == kCriteria.end())
      throw Error(ErrorCode::InvalidDocument, where + ": unknown criterion " + cells[2]);
    HumanRating r{cells[0], cells[1], cells[2], 0};
    try {
      std::size_t used = 0;
      r.rank = std::stoi(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidDocument, where + ": rank is not an integer");
    }
    out.push_back(std::move(r));
  }
  return out;
}

json tau_against_report(const std::vector<HumanRating>& ratings, const json& report, TauVariant variant) {
  // (scene, method) → metric ranks
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> metric;
  for (const auto& b : report.at("bundles")) {
    if (!b.at("failure").is_null()) continue;
    const auto& methods = b.at("methods");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const auto& row = b.at("ranks").at(i);
      metric[{b.at("bundle_id").get<std::string>(), methods[i].get<std::string>()}] = {row[0], row[1], row[2]};
    }
  }

  json out = json::object();
  for (std::size_t c = 0; c < kCriteria.size(); ++c) {
    std::vector<double> human, machine;
    for (const auto& r : ratings) {
      if (r.criterion != kCriteria[c]) continue;
      const auto it = metric.find({r.scene_id, r.method});
      if (it == metric.end()) continue;
      human.push_back(r.rank);
      machine.push_back(it->second[c]);
    }
    json entry{{"pairs", human.size()}, {"tau", nullptr}};
    if (!human.empty())
      if (const auto tau = kendall_tau(human, machine, variant)) entry["tau"] = *tau;
    out[kCriteria[c]] = entry;
  }
  return out;
}

} // namespace vipscene
