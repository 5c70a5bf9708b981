// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are pinned here and nowhere else.

#include "oracles.hpp"

#include "vipscene/config.hpp"
#include "vipscene/decompose.hpp"
#include "vipscene/fixtures.hpp"
#include "vipscene/fpveval.hpp"
#include "vipscene/ingest.hpp"
#include "vipscene/mllm.hpp"
#include "vipscene/orient.hpp"
#include "vipscene/pipeline.hpp"
#include "vipscene/refine.hpp"
#include "vipscene/retrieve.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace vipscene;
using nlohmann::json;

namespace {

// --- pinned tolerances --------------------------------------------------------------
constexpr double kScaleTol = 1e-6;
constexpr double kScaleSeconds = 1.0;
constexpr double kHaloGainPoints = 10.0;      // percentage points
constexpr double kHaloInlierMargin = 0.005;   // m around the true box
constexpr double kYawTolCleanDeg = 2.0;
constexpr double kYawTolNoisyDeg = 5.0;
constexpr double kYawNoiseSigma = 0.01;       // m
constexpr double kObbSizeRel = 0.03;
constexpr double kIcpRotTolDeg = 0.5;
constexpr double kIcpTransTol = 0.005;        // m
constexpr double kIcpDetTol = 1e-9;
constexpr double kIcpSeconds = 2.0;
constexpr double kSelectRmse = 1e-3;          // m
constexpr int kSelectRequired = 19;
constexpr double kRefineArea = 1e-6;          // m²
constexpr int kRefineRequired = 48;
constexpr int kRefineMaxIters = 2000;
constexpr double kRefineSeconds = 10.0;
constexpr double kFixedTol = 1e-9;
constexpr double kGradPureTol = 1e-6;
constexpr double kGradRichardsonTol = 1e-4;
constexpr double kE2ePositionTol = 0.3;       // m
constexpr double kE2eSeconds = 60.0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double deg(double rad) { return rad * 180 / std::numbers::pi; }
double rad(double d) { return d * std::numbers::pi / 180; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Outcome {
  bool pass;
  std::string detail;
};

class ScratchDir {
public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vipscene_accept_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

Vec3<double> vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

// 1 -----------------------------------------------------------------------------------
Outcome rescaling() {
  ScratchDir dir;
  double worst = 0, slowest = 0;
  for (double s : {0.5, 2.5, 7.0}) {
    RoomFixtureOptions opts;
    opts.scale = s;
    opts.outlier_fraction = 0.01;
    const fs::path out = dir.path() / std::to_string(s);
    write_room_fixture(out, opts);
    const auto t0 = std::chrono::steady_clock::now();
    const double est = estimate_scene_scale(load_frameset(out / "manifest.json"));
    slowest = std::max(slowest, seconds_since(t0));
    worst = std::max(worst, std::abs(est - s));
  }
  return {worst <= kScaleTol && slowest < kScaleSeconds,
          fmt("max |s_hat - s| = %.2e, slowest case %.3f s", worst, slowest)};
}

// 2 -----------------------------------------------------------------------------------
Outcome erosion() {
  ScratchDir dir;
  const json truth = write_halo_fixture(dir.path(), {});
  const FrameSet fs = load_frameset(dir.path() / "manifest.json");
  const auto& obj = truth["objects"][0];
  const Vec3<double> lo = vec3(obj["center"]) - vec3(obj["size"]) / 2, hi = vec3(obj["center"]) + vec3(obj["size"]) / 2;
  auto inlier_fraction = [&](Erosion e) {
    const PointCloud c = extract_object_cloud(fs, "obj0", e).cloud;
    Eigen::Index in = 0;
    for (Eigen::Index i = 0; i < c.cols(); ++i)
      if ((c.col(i).array() >= lo.array() - kHaloInlierMargin).all() &&
          (c.col(i).array() <= hi.array() + kHaloInlierMargin).all())
        ++in;
    return 100.0 * double(in) / double(c.cols());
  };
  const double off = inlier_fraction(Erosion::Off), on = inlier_fraction(Erosion::On);

  std::mt19937_64 rng(2024);
  int exact = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index h = 20 + Eigen::Index(rng() % 30), w = 20 + Eigen::Index(rng() % 30);
    BinaryMask m(h, w);
    for (int k = 0; k < 5; ++k) {
      const Eigen::Index cy = Eigen::Index(rng() % std::uint64_t(h)), cx = Eigen::Index(rng() % std::uint64_t(w));
      const int r = 2 + int(rng() % 9);
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
          if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) m.set(y, x, true);
    }
    for (int k = 0; k < 40; ++k) m.set(Eigen::Index(rng() % std::uint64_t(h)), Eigen::Index(rng() % std::uint64_t(w)), rng() % 2);
    const int radius = std::max(1, erosion_radius(m)) + int(rng() % 4);
    if (erode_mask(m, radius) == oracle::erode(m, radius)) ++exact;
  }
  return {on - off >= kHaloGainPoints && exact == 20,
          fmt("inliers %.1f%% -> %.1f%% with erosion; brute-force agreement %.0f/20", off, on, exact)};
}

// 3 -----------------------------------------------------------------------------------
Outcome orientation() {
  const Vec3<double> size(1.8, 0.75, 0.9);
  const Planed floor{Vec3<double>::UnitY(), 0};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0, kYawNoiseSigma);
  double worst_clean = 0, worst_noisy = 0, worst_size = 0;
  for (int k = 0; k < 12; ++k) {
    const double phi = rad(15.0 * k);
    const PointCloud local = oracle::grid_box_surface(size, 0.02);
    const PointCloud clean = (yaw_rotation(phi) * local).colwise() + Vec3<double>(0.4, size.y() / 2, -0.3);
    PointCloud noisy = clean;
    for (Eigen::Index i = 0; i < noisy.cols(); ++i)
      noisy.col(i) += Vec3<double>(noise(rng), noise(rng), noise(rng));

    auto err = [&](const PointCloud& c) {
      const double d = std::fmod(std::abs(estimate_orientation(c, floor) - phi), std::numbers::pi);
      return deg(std::min(d, std::numbers::pi - d));
    };
    worst_clean = std::max(worst_clean, err(clean));
    worst_noisy = std::max(worst_noisy, err(noisy));
    const OrientedBox box = fit_obb(clean, estimate_orientation(clean, floor), floor);
    for (int a = 0; a < 3; ++a) worst_size = std::max(worst_size, std::abs(box.size(a) / size(a) - 1));
  }
  return {worst_clean <= kYawTolCleanDeg && worst_noisy <= kYawTolNoisyDeg && worst_size <= kObbSizeRel,
          fmt("max yaw error clean %.3f deg, noisy %.3f deg; max OBB size error %.2f%%", worst_clean, worst_noisy,
              100 * worst_size)};
}

// 4 -----------------------------------------------------------------------------------
Outcome icp() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  const PointCloud src = sample_asset_surface({AssetShape::Kind::LShape, {1.9, 0.85, 0.95}}, 2048, 5);
  double worst_rot = 0, worst_t = 0, worst_det = 0, slowest = 0;
  bool monotone = true;
  for (int trial = 0; trial < 10; ++trial) {
    Vec3<double> t(u(rng), u(rng), u(rng));
    t *= 0.5 * std::abs(u(rng)) / t.norm();
    const RigidTransformd truth{yaw_rotation(rad(30) * u(rng)), t};
    Vec3<double> axis(u(rng), u(rng), u(rng));
    axis.normalize();
    Vec3<double> dt(u(rng), u(rng), u(rng));
    dt *= 0.2 * std::abs(u(rng)) / dt.norm();
    const RigidTransformd init{Eigen::AngleAxisd(rad(10) * std::abs(u(rng)), axis).toRotationMatrix() * truth.rotation,
                               truth.translation + dt};
    const PointCloud dst = truth.apply(src);
    const auto t0 = std::chrono::steady_clock::now();
    const RegistrationResult r = icp_register(src, dst, init);
    slowest = std::max(slowest, seconds_since(t0));
    worst_rot = std::max(worst_rot, deg(Eigen::AngleAxisd(r.transform.rotation.transpose() * truth.rotation).angle()));
    worst_t = std::max(worst_t, (r.transform.translation - truth.translation).norm());
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      worst_det = std::max(worst_det, std::abs(r.trace[k].transform.rotation.determinant() - 1));
      if (k > 0 && r.trace[k].rmse > r.trace[k - 1].rmse) monotone = false;
    }
  }
  return {worst_rot <= kIcpRotTolDeg && worst_t <= kIcpTransTol && monotone && worst_det <= kIcpDetTol &&
              slowest < kIcpSeconds,
          fmt("max error %.2e deg / %.2e m, max |det R - 1| %.1e", worst_rot, worst_t, worst_det) +
              fmt(", slowest %.3f s, rmse trace ", slowest) + (monotone ? "monotone" : "NOT monotone")};
}

// 5 -----------------------------------------------------------------------------------
Outcome asset_selection() {
  const AssetCatalog catalog = make_catalog(5);
  std::vector<const AssetRecord*> all;
  for (const auto& [id, rec] : catalog.records()) all.push_back(&rec);
  const auto spec = catalog_spec(5);
  const Planed floor{Vec3<double>::UnitY(), 0};
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-2, 2), yaw(0, 2 * std::numbers::pi);

  auto place = [&](const AssetRecord& rec, double theta) {
    ObjectInstance o;
    o.object_id = "probe";
    o.category = rec.category;
    o.cloud = RigidTransformd{yaw_rotation(theta), {u(rng), rec.canonical_size.y() / 2, u(rng)}}.apply(rec.cloud);
    return o;
  };

  int picked = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Selection s = select_asset(place(*all[i], yaw(rng)), all, floor);
    if (s.asset == all[i] && s.rmse < kSelectRmse) ++picked;
  }

  std::vector<const AssetRecord*> l_shapes;
  for (const auto& e : spec)
    if (e.shape.kind == AssetShape::Kind::LShape) l_shapes.push_back(catalog.find(e.asset_id));
  int resolved = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const AssetRecord& rec = *l_shapes[std::size_t(trial) % l_shapes.size()];
    // alternate between the two half-turns so both poses must win sometimes
    const double theta = 0.2 + 0.25 * trial + (trial % 2 ? std::numbers::pi : 0);
    const Selection s = select_asset(place(rec, theta), {&rec}, floor);
    double d = std::fmod(std::abs(s.resolved_theta - theta), 2 * std::numbers::pi);
    d = std::min(d, 2 * std::numbers::pi - d);
    if (deg(d) < 1.0) ++resolved;
  }
  return {picked >= kSelectRequired && resolved == 10,
          fmt("exact asset picked %.0f/20, L-shape front resolved %.0f/10 (%.0f L-shaped assets)", picked, resolved,
              double(l_shapes.size()))};
}

// 6 -----------------------------------------------------------------------------------
// Violations recomputed with the oracle's own rectangles and hull-based areas.
std::pair<double, double> recompute_violations(const SceneLayout& layout) {
  std::vector<std::vector<Vec2<double>>> rects;
  for (const auto& o : layout.objects)
    rects.push_back(oracle::rectangle(o.size.x(), o.size.z(), o.position().x(), o.position().y(), o.theta));
  double overlap = 0, boundary = 0;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      const auto& a = layout.objects[i];
      const auto& b = layout.objects[j];
      if (a.y_max < b.y_min || b.y_max < a.y_min) continue;
      overlap += oracle::intersection_area(rects[i], rects[j]);
    }
    if (layout.room)
      boundary += oracle::shoelace(rects[i]) - oracle::intersection_area(rects[i], layout.room->vertices());
  }
  return {overlap, boundary};
}

Outcome refinement() {
  RefineConfig cfg;
  cfg.lambda_o = cfg.lambda_b = 10;
  cfg.max_iters = kRefineMaxIters;
  int solved = 0, max_n = 0;
  double slowest = 0, worst_fixed = 0;
  std::vector<int> unsolved;
  for (int seed = 0; seed < 50; ++seed) {
    const SceneLayout layout = make_collision_scene(std::uint64_t(seed), 20);
    max_n = std::max(max_n, int(layout.objects.size()));
    const auto t0 = std::chrono::steady_clock::now();
    const auto [out, report] = refine_layout(layout, cfg);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    const auto [lo, lb] = recompute_violations(out);
    if (lo <= kRefineArea && lb <= kRefineArea && report.iterations <= kRefineMaxIters && secs < kRefineSeconds)
      ++solved;
    else
      unsolved.push_back(seed);

    if (seed < 10) {
      RefineConfig still = cfg;
      still.lambda_o = still.lambda_b = 0;
      SceneLayout anchored = layout;
      for (auto& o : anchored.objects) o.set_position(o.original_position);
      const auto [fixed, r0] = refine_layout(anchored, still);
      worst_fixed = std::max(worst_fixed, (fixed.positions() - anchored.positions()).cwiseAbs().maxCoeff());
    }
  }
  std::string failed;
  for (int s : unsolved) failed += " " + std::to_string(s);
  return {solved >= kRefineRequired && worst_fixed <= kFixedTol,
          fmt("%.0f/50 scenes collision-free (N <= %.0f), slowest %.2f s", solved, max_n, slowest) +
              fmt(", zero-weight drift %.1e", worst_fixed) + (failed.empty() ? "" : "; unsolved seeds:" + failed)};
}

// 7 -----------------------------------------------------------------------------------
Eigen::VectorXd central_difference(const SceneLayout& layout, const RefineConfig& cfg, double h) {
  const Eigen::VectorXd x0 = layout.positions();
  Eigen::VectorXd g(x0.size());
  SceneLayout probe = layout;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Eigen::VectorXd x = x0;
    x(i) += h;
    probe.set_positions(x);
    const double up = total_loss(probe, cfg).value;
    x(i) = x0(i) - h;
    probe.set_positions(x);
    g(i) = (up - total_loss(probe, cfg).value) / (2 * h);
  }
  return g;
}

Outcome gradient_check() {
  double worst_pure = 0, worst_full = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const SceneLayout layout = make_collision_scene(std::uint64_t(100 + seed), 12);
    RefineConfig pure;
    pure.lambda_o = pure.lambda_b = 0;
    const Eigen::VectorXd g = loss_gradient(layout, pure);
    for (std::size_t i = 0; i < layout.objects.size(); ++i) {
      const auto& o = layout.objects[i];
      const Vec2<double> analytic = 2 * (o.position() - o.original_position);
      worst_pure = std::max(worst_pure, (g.segment<2>(2 * Eigen::Index(i)) - analytic).cwiseAbs().maxCoeff());
    }
    // start from a perturbed state so every term contributes
    SceneLayout moved = layout;
    Eigen::VectorXd x = moved.positions();
    std::mt19937_64 rng{std::uint64_t(seed)};
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += u(rng);
    moved.set_positions(x);
    const RefineConfig full;
    const double h = full.fd_step;
    const Eigen::VectorXd richardson =
        (4 * central_difference(moved, full, h / 2) - central_difference(moved, full, h)) / 3;
    worst_full = std::max(worst_full, (loss_gradient(moved, full) - richardson).cwiseAbs().maxCoeff());
  }
  return {worst_pure <= kGradPureTol && worst_full <= kGradRichardsonTol,
          fmt("pure position term max error %.2e; full loss vs Richardson max error %.2e", worst_pure, worst_full)};
}

// 8 -----------------------------------------------------------------------------------
Outcome protocol_fidelity(const fs::path& data) {
  bool yaws_ok = true;
  const auto poses = sweep_poses(SweepSpec{});
  yaws_ok = poses.size() == 12;
  for (std::size_t k = 0; k < poses.size(); ++k) yaws_ok &= std::abs(deg(poses[k].yaw) - 30.0 * double(k)) < 1e-9;

  bool dims_ok = true;
  for (int m : {1, 2, 3, 5})
    for (int v : {2, 12}) {
      EvalBundle b{"b", "", {}};
      for (int i = 0; i < m; ++i)
        b.methods.push_back({"m" + std::to_string(i), std::vector<RasterImage>(std::size_t(v), RasterImage(32, 24))});
      const RasterImage s = compose_summary(b);
      dims_ok &= s.width == v * 32 && s.height == m * 24;
    }

  const std::string description = "A bedroom with a double bed, two nightstands and a wardrobe.";
  const bool fpv_ok = build_fpv_prompt(description) == read_file(data / "fpv_prompt.golden.txt");
  const bool top_ok = build_topdown_prompt(description) == read_file(data / "topdown_prompt.golden.txt");

  std::mt19937_64 rng(8);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Matrix<int, Eigen::Dynamic, 3> r(3, 3);
    for (int c = 0; c < 3; ++c) {
      std::array<int, 3> perm{1, 2, 3};
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int i = 0; i < 3; ++i) r(i, c) = perm[std::size_t(i)];
    }
    std::ostringstream reply;
    reply << "Analysis:\n1. Semantic Correctness: The first one ...; The second one ...; The third one ...\n\n"
          << "Final answer:\n";
    const char* ord[] = {"first", "second", "third"};
    for (int i = 0; i < 3; ++i) reply << "The " << ord[i] << " one: " << r(i, 0) << ' ' << r(i, 1) << ' ' << r(i, 2) << "\n";
    try {
      if (parse_rankings(reply.str()).ranks != r) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  return {yaws_ok && dims_ok && fpv_ok && top_ok && failures == 0,
          std::string("sweep yaws ") + (yaws_ok ? "0..330 by 30" : "WRONG") + ", summary dims " +
              (dims_ok ? "ok" : "WRONG") + ", fpv prompt " + (fpv_ok ? "golden" : "DIFFERS") + ", top-down prompt " +
              (top_ok ? "golden" : "DIFFERS") + fmt(", %.0f/1000 parse failures", failures)};
}

// 9 -----------------------------------------------------------------------------------
Outcome kendall() {
  int checked = 0, mismatches = 0;
  std::vector<double> base{1, 2, 3, 4, 5, 6}, perm = base;
  do {
    ++checked;
    if (kendall_tau(base, perm).value() != oracle::tau_b(base, perm)) ++mismatches;
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::mt19937_64 rng(9);
  int undefined = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = double(rng() % 3);
      b[i] = double(rng() % 4);
    }
    ++checked;
    const auto tau = kendall_tau(a, b);
    const double ref = oracle::tau_b(a, b);
    if (std::isnan(ref)) {
      ++undefined;
      if (tau) ++mismatches;
    } else if (!tau || *tau != ref) {
      ++mismatches;
    }
  }
  const bool ends = kendall_tau({1, 2, 3, 4}, {1, 2, 3, 4}).value() == 1.0 &&
                    kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}).value() == -1.0;
  return {mismatches == 0 && ends,
          fmt("%.0f lists compared exactly, %.0f mismatches (%.0f undefined by the oracle and the library)", checked,
              mismatches, undefined) +
              (ends ? ", identity 1 and reversal -1" : ", identity/reversal WRONG")};
}

// 10 ----------------------------------------------------------------------------------
Outcome end_to_end() {
  ScratchDir dir;
  const json truth = write_room_fixture(dir.path() / "room", {});
  write_catalog_fixture(dir.path() / "catalog", 0);
  const PipelineConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult first = run_pipeline(dir.path() / "room" / "manifest.json", dir.path() / "catalog", cfg,
                                            dir.path() / "run1");
  const double secs = seconds_since(t0);
  run_pipeline(dir.path() / "room" / "manifest.json", dir.path() / "catalog", cfg, dir.path() / "run2");
  const bool identical = read_file(dir.path() / "run1" / "scene.json") == read_file(dir.path() / "run2" / "scene.json");

  int categories = 0;
  double worst = 0;
  for (const auto& t : truth["objects"]) {
    const auto it = std::find_if(first.scene.objects.begin(), first.scene.objects.end(),
                                 [&](const SceneObject& o) { return o.object_id == t["object_id"]; });
    if (it == first.scene.objects.end()) {
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    if (it->category == t["category"]) ++categories;
    worst = std::max(worst, (it->position - vec3(t["center"])).norm());
  }
  return {categories == 5 && worst <= kE2ePositionTol && identical && secs < kE2eSeconds,
          fmt("categories %.0f/5, max position error %.3f m, run time %.2f s", categories, worst, secs) +
              ", refine " + to_string(first.refine.reason) + (identical ? ", reruns byte-identical" : ", reruns DIFFER")};
}

// 11 ----------------------------------------------------------------------------------
Outcome evaluation_replay(const fs::path& data) {
  const fs::path eval = data / "eval";
  const PipelineConfig cfg = load_config(eval / "eval.cfg");
  const auto bundles = load_eval_bundles(eval / "bundles.json", cfg.sweep);
  const json report =
      evaluate(bundles, MllmClient(std::make_shared<ReplayTransport>(eval / "replies"), cfg.mllm));
  const bool same = report.dump(2) + "\n" == read_file(eval / "eval_report.golden.json");

  // rank -> score: method_count + 1 - rank, so the best of three scores 3
  bool convention = true;
  int parsed = 0;
  for (const auto& b : report["bundles"]) {
    if (!b["failure"].is_null()) continue;
    ++parsed;
    const int m = int(b["methods"].size());
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < 3; ++c)
        convention &= b["scores"][b["methods"][i].get<std::string>()][c].get<int>() == m + 1 - b["ranks"][i][c].get<int>();
  }
  convention &= report["bundles"][0]["scores"]["ours"] == json{3, 3, 3};
  // office: base_a ranked 2, 3, 1 scores 2, 1, 3; its mean with bedroom's 2, 2, 2
  convention &= report["bundles"][1]["scores"]["base_a"] == json{2, 1, 3};
  convention &= report["aggregate"]["mean_scores"]["base_a"] == json{2.0, 1.5, 2.5};
  convention &= report["aggregate"]["bundles_failed"] == 1;
  return {same && convention,
          std::string(same ? "report byte-identical to the checked-in golden" : "report DIFFERS from golden") +
              fmt(", %.0f/%.0f bundles parsed, ", parsed, double(report["bundles"].size())) +
              (convention ? "best rank scores 3" : "score convention WRONG")};
}

} // namespace

int main(int argc, char** argv) {
  const fs::path data = argc > 1 ? fs::path(argv[1]) : fs::path(VIPSCENE_TEST_DATA);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 rescaling", rescaling},
      {"2 erosion", erosion},
      {"3 orientation", orientation},
      {"4 icp", icp},
      {"5 asset selection", asset_selection},
      {"6 refinement", refinement},
      {"7 gradient check", gradient_check},
      {"8 fpv protocol fidelity", [&] { return protocol_fidelity(data); }},
      {"9 kendall tau", kendall},
      {"10 end-to-end", end_to_end},
      {"11 evaluation replay", [&] { return evaluation_replay(data); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all 11 criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
