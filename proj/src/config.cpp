#include "vipscene/config.hpp"

#include "vipscene/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <variant>

namespace vipscene {

namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed slot shares the size_t alternative");
using Slot = std::variant<double*, int*, bool*, std::string*, std::size_t*, Eigen::Index*, TauVariant*>;

struct Entry {
  std::string section, key;
  Slot slot;
};

std::vector<Entry> entries(PipelineConfig& c) {
  return {
      {"erosion", "enabled", &c.erosion_enabled},
      {"erosion", "alpha", &c.erosion.alpha},
      {"erosion", "r_min", &c.erosion.r_min},
      {"erosion", "r_max", &c.erosion.r_max},
      {"orient", "trim_fraction", &c.obb.trim_fraction},
      {"orient", "min_extent", &c.obb.min_extent},
      {"retrieve", "k", &c.retrieve.k},
      {"retrieve", "icp_max_iter", &c.retrieve.icp.max_iter},
      {"retrieve", "icp_tol", &c.retrieve.icp.tol},
      {"retrieve", "max_points", &c.retrieve.max_points},
      {"retrieve", "seed", &c.retrieve.seed},
      {"refine", "lambda_o", &c.refine.lambda_o},
      {"refine", "lambda_b", &c.refine.lambda_b},
      {"refine", "step", &c.refine.step},
      {"refine", "fd_step", &c.refine.fd_step},
      {"refine", "max_iters", &c.refine.max_iters},
      {"refine", "eps_area", &c.refine.eps_area},
      {"refine", "stall_window", &c.refine.stall_window},
      {"refine", "stall_delta", &c.refine.stall_delta},
      {"refine", "max_halvings", &c.refine.max_halvings},
      {"render", "width", &c.sweep.width},
      {"render", "height", &c.sweep.height},
      {"render", "fov", &c.sweep.fov},
      {"render", "n_views", &c.sweep.n_views},
      {"render", "eye_height", &c.sweep.eye_height},
      {"render", "topdown_size", &c.topdown_size},
      {"mllm", "endpoint", &c.mllm.endpoint},
      {"mllm", "model", &c.mllm.model},
      {"mllm", "token_env", &c.mllm.token_env},
      {"mllm", "timeout_s", &c.mllm.timeout_s},
      {"mllm", "max_retries", &c.mllm.max_retries},
      {"mllm", "concurrency", &c.mllm.concurrency},
      {"eval", "tau", &c.tau},
      {"pipeline", "workers", &c.workers},
  };
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

template <typename T> T parse_integer(const std::string& raw) {
  T v{};
  const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec == std::errc::result_out_of_range) throw std::out_of_range(raw);
  if (ec != std::errc() || end != raw.data() + raw.size()) throw std::invalid_argument(raw);
  return v;
}

void assign(const Slot& slot, const std::string& raw) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, double>) {
          std::size_t used = 0;
          *target = std::stod(raw, &used);
          if (used != raw.size()) throw std::invalid_argument(raw);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (raw != "true" && raw != "false") throw std::invalid_argument(raw);
          *target = raw == "true";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') throw std::invalid_argument(raw);
          *target = nlohmann::json::parse(raw).get<std::string>();
        } else if constexpr (std::is_same_v<T, TauVariant>) {
          if (raw == "\"a\"") *target = TauVariant::A;
          else if (raw == "\"b\"") *target = TauVariant::B;
          else throw std::invalid_argument(raw);
        } else {
          *target = parse_integer<T>(raw);
        }
      },
      slot);
}

std::string render(const Slot& slot) {
  return std::visit(
      [](auto* source) -> std::string {
        using T = std::remove_pointer_t<decltype(source)>;
        if constexpr (std::is_same_v<T, bool>) return *source ? "true" : "false";
        else if constexpr (std::is_same_v<T, TauVariant>) return *source == TauVariant::A ? "\"a\"" : "\"b\"";
        else return nlohmann::json(*source).dump();
      },
      slot);
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
  };
  require(c.erosion.alpha >= 0, "erosion.alpha must be ≥ 0");
  require(c.erosion.r_min >= 0 && c.erosion.r_min <= c.erosion.r_max, "erosion needs 0 ≤ r_min ≤ r_max");
  require(c.obb.trim_fraction >= 0 && c.obb.trim_fraction < 0.5, "orient.trim_fraction must be in [0, 0.5)");
  require(c.obb.min_extent > 0, "orient.min_extent must be > 0");
  require(c.retrieve.k >= 1, "retrieve.k must be ≥ 1");
  require(c.retrieve.icp.max_iter >= 1 && c.retrieve.icp.tol >= 0, "invalid ICP settings");
  require(c.retrieve.max_points >= 3, "retrieve.max_points must be ≥ 3");
  require(c.refine.lambda_o >= 0 && c.refine.lambda_b >= 0, "refine weights must be ≥ 0");
  require(c.refine.step > 0 && c.refine.fd_step > 0, "refine steps must be > 0");
  require(c.refine.max_iters >= 0 && c.refine.stall_window >= 1 && c.refine.max_halvings >= 0,
          "invalid refine iteration limits");
  require(c.sweep.n_views >= 2, "render.n_views must be ≥ 2");
  require(c.sweep.width > 0 && c.sweep.height > 0 && c.topdown_size > 0, "render sizes must be > 0");
  require(c.sweep.fov > 0 && c.sweep.fov < 3.141592653589793, "render.fov must be in (0, π)");
  require(c.mllm.max_retries >= 0, "mllm.max_retries must be ≥ 0");
  require(c.mllm.concurrency >= 1, "mllm.concurrency must be ≥ 1");
  require(c.mllm.timeout_s > 0, "mllm.timeout_s must be > 0");
  require(c.workers >= 1, "pipeline.workers must be ≥ 1");
}

} // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::map<std::string, Slot> slots;
  for (auto& e : entries(cfg)) slots.emplace(e.section + "." + e.key, e.slot);

  std::istringstream in(text);
  std::string section;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::InvalidConfig, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, where + "expected key = value");
    const std::string name = section + "." + trim(line.substr(0, eq));
    const auto it = slots.find(name);
    if (it == slots.end()) throw Error(ErrorCode::InvalidConfig, where + "unknown key " + name);
    const std::string raw = trim(line.substr(eq + 1));
    try {
      assign(it->second, raw);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, where + "bad value for " + name + ": " + raw);
    }
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  return parse_config(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

std::string dump_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::string out, section;
  for (const auto& e : entries(copy)) {
    if (e.section != section) {
      out += (section.empty() ? "[" : "\n[") + e.section + "]\n";
      section = e.section;
    }
    out += e.key + " = " + render(e.slot) + "\n";
  }
  return out;
}

} // namespace vipscene
