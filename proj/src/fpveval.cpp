#include "vipscene/fpveval.hpp"

#include "vipscene/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace vipscene {

// --- sweeps ---------------------------------------------------------------------------

std::vector<CameraPose> sweep_poses(const SweepSpec& spec) {
  if (spec.n_views < 2) throw Error(ErrorCode::DegenerateInput, "a sweep needs at least two views");
  if (spec.width <= 0 || spec.height <= 0 || !(spec.fov > 0 && spec.fov < std::numbers::pi))
    throw Error(ErrorCode::DegenerateInput, "invalid sweep camera");
  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(spec.n_views));
  for (int k = 0; k < spec.n_views; ++k) {
    CameraPose p;
    p.eye = spec.center + Vec3<double>(0, spec.eye_height, 0);
    p.yaw = 2 * std::numbers::pi * k / spec.n_views;
    p.pitch = 0;
    p.fov = spec.fov;
    p.width = spec.width;
    p.height = spec.height;
    poses.push_back(p);
  }
  return poses;
}

Vec3<double> sweep_center(const SceneDocument& doc) {
  double floor_y = 0;
  if (!doc.objects.empty()) {
    floor_y = std::numeric_limits<double>::infinity();
    for (const auto& o : doc.objects) floor_y = std::min(floor_y, o.position.y() - o.size.y() / 2);
  }
  if (doc.room) {
    const Polygon2Dd room(*doc.room);
    if (!room.empty()) {
      const Vec2<double> c = room.centroid();
      return {c.x(), floor_y, c.y()};
    }
  }
  if (doc.objects.empty()) return Vec3<double>::Zero();
  Vec2<double> lo = Vec2<double>::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& o : doc.objects) {
    const auto [a, b] = footprint_rectangle(o.size, Vec2<double>(o.position.x(), o.position.z()), o.theta).bounds();
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(b);
  }
  const Vec2<double> mid = (lo + hi) / 2;
  return {mid.x(), floor_y, mid.y()};
}

std::vector<RasterImage> render_sweep(const SceneDocument& doc, const SweepSpec& spec) {
  std::vector<RasterImage> views;
  for (const auto& pose : sweep_poses(spec)) views.push_back(render_fpv(doc, pose));
  return views;
}

RasterImage compose_summary(const EvalBundle& bundle) {
  if (bundle.methods.empty() || bundle.methods.front().sweep_images.empty())
    throw Error(ErrorCode::ShapeMismatch, "bundle has no views");
  const auto& first = bundle.methods.front().sweep_images.front();
  const int vw = first.width, vh = first.height;
  const std::size_t n_views = bundle.methods.front().sweep_images.size();
  for (const auto& m : bundle.methods) {
    if (m.sweep_images.size() != n_views)
      throw Error(ErrorCode::ShapeMismatch, m.method_name + " has a different view count");
    for (const auto& v : m.sweep_images)
      if (v.width != vw || v.height != vh)
        throw Error(ErrorCode::ShapeMismatch, m.method_name + " has a view of a different size");
  }

  RasterImage out(static_cast<int>(n_views) * vw, static_cast<int>(bundle.methods.size()) * vh);
  const std::size_t row_bytes = static_cast<std::size_t>(vw) * 3;
  for (std::size_t m = 0; m < bundle.methods.size(); ++m)
    for (std::size_t v = 0; v < n_views; ++v) {
      const RasterImage& view = bundle.methods[m].sweep_images[v];
      for (int y = 0; y < vh; ++y) {
        const std::size_t dst_row = m * static_cast<std::size_t>(vh) + static_cast<std::size_t>(y);
        auto dst = out.pixels.begin() + static_cast<std::ptrdiff_t>((dst_row * static_cast<std::size_t>(out.width) +
                                                                     v * static_cast<std::size_t>(vw)) * 3);
        auto src = view.pixels.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(y) * row_bytes);
        std::copy(src, src + static_cast<std::ptrdiff_t>(row_bytes), dst);
      }
    }
  return out;
}

// --- prompts --------------------------------------------------------------------------

namespace {

const char* const kFpvTemplate =
    "Task: Compare the room layout rationality of @COUNT@ methods, all generated from the same text description. "
    "From top to bottom, the video sequences display a 360-degree view of each method’s generated scene. "
    "Decide which method performs best according to the criteria below.\n"
    "\n"
    "Text Description: {text_description}\n"
    "\n"
    "Instructions:\n"
    "\n"
    "@CRITERIA@"
    "\n"
    "Evaluation process:\n"
    "Carefully examine the multi-view images of all @COUNT@ 3D scenes. Focus on one criterion at a time and make "
    "independent judgments for each.\n"
    "\n"
    "Output format:\n"
    "Provide a clear, concise analysis for each criterion. Avoid vague terms like “realistic” or "
    "“spacious.” Instead, specify exact issues or strengths. For example:\n"
    "- For Semantic Correctness, indicate which objects are missing or inaccurately depicted.\n"
    "- For Layout Correctness, specify which objects are misplaced or poorly oriented, and explain how this impacts "
    "usability or functionality.\n"
    "\n"
    "After the analyses, assign ranks (1–@M@) to each method per criterion (1 = best, @M@ = worst).\n"
    "\n"
    "Summarize your final ranking in the format: <rank for criterion 1> <rank for criterion 2> <rank for "
    "criterion 3>\n"
    "for each method.\n"
    "\n"
    "Example:\n"
    "\n"
    "Analysis:\n"
    "1. Semantic Correctness: @ANALYSIS@\n"
    "2. Layout Correctness: @ANALYSIS@\n"
    "3. Overall Preference: @ANALYSIS@\n"
    "\n"
    "Final answer:\n"
    "@ANSWER@"
    "\n"
    "(where x denotes ranks 1–@M@)\n"
    "\n"
    "(Please strictly follow the format above. Do not include extra symbols like **, quotation marks, or bullet "
    "points.)\n";

const char* const kTopdownTemplate =
    "Task: Compare the room layout rationality of @COUNT@ methods, all generated from the same text description. "
    "The top-down views of the scenes produced by the @COUNT@ methods are presented from left to right. Identify "
    "which method performs best based on the criteria below.\n"
    "\n"
    "Text Description: {text_description}\n"
    "\n"
    "Instructions:\n"
    "\n"
    "@CRITERIA@"
    "\n"
    "Provide only your final ranking of the @COUNT@ methods in the format below:\n"
    "\n"
    "Final answer:\n"
    "@XS@\n"
    "\n"
    "(where x denotes ranks from 1 to @M@)\n";

const char* const kCriteriaBlock =
    "1. Semantic Correctness\n"
    "Does the generated layout accurately reflect the text description?\n"
    "Check whether all described objects are present and correctly represented.\n"
    "\n"
    "2. Layout Correctness\n"
    "Is the room design physically plausible and functional?\n"
    "Evaluate if the layout supports practical use, space efficiency, and proper object functionality. Consider "
    "object positions, orientations, and user convenience.\n"
    "\n"
    "3. Overall Preference\n"
    "Does the room layout look realistic and natural?\n"
    "Consider the visual coherence and harmony of the scene.\n";

constexpr std::array<const char*, 11> kCardinals{"zero", "one", "two", "three", "four", "five",
                                                  "six",  "seven", "eight", "nine", "ten"};
constexpr std::array<const char*, 11> kOrdinals{"zeroth", "first",  "second", "third",  "fourth", "fifth",
                                                 "sixth",  "seventh", "eighth", "ninth", "tenth"};

void check_method_count(int m) {
  if (m < 2 || m > 10) throw Error(ErrorCode::InvalidConfig, "method_count must be in 2..10");
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string the_kth_one(int k) { return std::string("The ") + kOrdinals[static_cast<std::size_t>(k)] + " one"; }

std::string instantiate(std::string text, const std::string& description, int m) {
  std::string analysis, answer, xs;
  for (int k = 1; k <= m; ++k) {
    analysis += (k > 1 ? "; " : "") + the_kth_one(k) + " ...";
    answer += the_kth_one(k) + ": x x x\n";
    xs += k > 1 ? " x" : "x";
  }
  replace_all(text, "@CRITERIA@", kCriteriaBlock);
  replace_all(text, "@COUNT@", kCardinals[static_cast<std::size_t>(m)]);
  replace_all(text, "@M@", std::to_string(m));
  replace_all(text, "@ANALYSIS@", analysis);
  replace_all(text, "@ANSWER@", answer);
  replace_all(text, "@XS@", xs);
  // the description goes in last so its bytes are never rewritten
  const std::size_t at = text.find(kDescriptionPlaceholder);
  text.replace(at, std::string(kDescriptionPlaceholder).size(), description);
  return text;
}

} // namespace

std::string build_fpv_prompt(const std::string& description, int method_count) {
  check_method_count(method_count);
  return instantiate(kFpvTemplate, description, method_count);
}

std::string build_topdown_prompt(const std::string& description, int method_count) {
  check_method_count(method_count);
  return instantiate(kTopdownTemplate, description, method_count);
}

// --- replies --------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

// Removes the markup judges add despite being told not to.
std::string clean_line(std::string line) {
  for (const char* junk : {"“", "”", "•"}) replace_all(line, junk, "");
  std::erase_if(line, [](char c) { return c == '*' || c == '"' || c == '`'; });
  line = trim(line);
  while (!line.empty() && (line[0] == '-' || line[0] == '>' || line[0] == '+')) line = trim(line.substr(1));
  return line;
}

// Non-empty cleaned lines after the last marker.
std::vector<std::string> answer_lines(const std::string& reply) {
  static const std::string marker = "final answer:";
  std::string lower = reply;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  const std::size_t pos = lower.rfind(marker);
  if (pos == std::string::npos) throw Error(ErrorCode::MissingMarker, "no \"Final answer:\" in reply");

  std::vector<std::string> lines;
  std::istringstream in(reply.substr(pos + marker.size()));
  for (std::string line; std::getline(in, line);) {
    line = clean_line(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<int> parse_rank_line(const std::string& line, int count, int max_rank) {
  std::string body = line;
  if (const auto colon = body.rfind(':'); colon != std::string::npos) body = body.substr(colon + 1);
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  std::vector<int> out;
  for (std::string tok; in >> tok;) {
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }) || tok.size() > 3)
      throw Error(ErrorCode::ParseFailure, "not a rank line: " + line);
    const int v = std::stoi(tok);
    if (v < 1 || v > max_rank) throw Error(ErrorCode::ParseFailure, "rank out of range: " + line);
    out.push_back(v);
  }
  if (static_cast<int>(out.size()) != count)
    throw Error(ErrorCode::ParseFailure, "expected " + std::to_string(count) + " ranks: " + line);
  return out;
}

} // namespace

RankMatrix parse_rankings(const std::string& reply, int method_count) {
  if (method_count < 1) throw Error(ErrorCode::InvalidConfig, "method_count must be positive");
  const auto lines = answer_lines(reply);
  if (lines.size() < static_cast<std::size_t>(method_count))
    throw Error(ErrorCode::ParseFailure, "expected " + std::to_string(method_count) + " rank lines, found " +
                                             std::to_string(lines.size()));
  RankMatrix m;
  m.ranks.resize(method_count, 3);
  for (int i = 0; i < method_count; ++i) {
    const auto row = parse_rank_line(lines[static_cast<std::size_t>(i)], 3, method_count);
    for (int c = 0; c < 3; ++c) m.ranks(i, c) = row[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < 3; ++c) {
    std::vector<int> col(m.ranks.col(c).begin(), m.ranks.col(c).end());
    std::sort(col.begin(), col.end());
    std::vector<int> perm(col.size());
    std::iota(perm.begin(), perm.end(), 1);
    m.ties[static_cast<std::size_t>(c)] = col != perm;
  }
  return m;
}

std::vector<int> parse_topdown_ranking(const std::string& reply, int method_count) {
  if (method_count < 1) throw Error(ErrorCode::InvalidConfig, "method_count must be positive");
  const auto lines = answer_lines(reply);
  if (lines.empty()) throw Error(ErrorCode::ParseFailure, "empty final answer");
  return parse_rank_line(lines.front(), method_count, method_count);
}

std::string build_reply(const RankMatrix& matrix) {
  std::string out = "Final answer:\n";
  for (Eigen::Index i = 0; i < matrix.method_count(); ++i) {
    const auto k = static_cast<std::size_t>(i + 1);
    out += k < kOrdinals.size() ? std::string("The ") + kOrdinals[k] + " one:" : "Method " + std::to_string(k) + ":";
    for (int c = 0; c < 3; ++c) out += " " + std::to_string(matrix.ranks(i, c));
    out += "\n";
  }
  return out;
}

Eigen::Matrix<int, Eigen::Dynamic, 3> rank_scores(const RankMatrix& matrix) {
  return (static_cast<int>(matrix.method_count()) + 1) - matrix.ranks.array();
}

// --- Kendall's tau ----------------------------------------------------------------------

namespace {

// Sum of t(t−1)/2 over runs of equal values in an already sorted sequence.
template <typename Eq> std::int64_t tied_pairs(std::size_t n, Eq equal) {
  std::int64_t pairs = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  return pairs;
}

// Sorts v ascending and returns the number of strictly inverted pairs.
std::int64_t count_inversions(std::vector<double>& v) {
  std::int64_t swaps = 0;
  std::vector<double> buf(v.size());
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size()), hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    v.swap(buf);
  }
  return swaps;
}

} // namespace

std::optional<double> kendall_tau(const std::vector<double>& a, const std::vector<double>& b, TauVariant variant) {
  if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::LengthMismatch, "tau needs equal nonempty lists");
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
  });
  const auto n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t n1 = tied_pairs(n, [&](std::size_t i, std::size_t j) { return a[order[i]] == a[order[j]]; });
  const std::int64_t n3 = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return a[order[i]] == a[order[j]] && b[order[i]] == b[order[j]];
  });
  std::vector<double> bs(n);
  for (std::size_t i = 0; i < n; ++i) bs[i] = b[order[i]];
  const std::int64_t swaps = count_inversions(bs);
  const std::int64_t n2 = tied_pairs(n, [&](std::size_t i, std::size_t j) { return bs[i] == bs[j]; });

  if (n0 == n1 || n0 == n2) return std::nullopt;
  const auto numerator = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  if (variant == TauVariant::A) return numerator / static_cast<double>(n0);
  return numerator / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

} // namespace vipscene
