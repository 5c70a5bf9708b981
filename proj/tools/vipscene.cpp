// vipscene: staged scene reconstruction and first-person-view evaluation.
//
// Exit codes: 0 success, 2 usage, 3 bad input, 4 stage failure,
// 5 unparseable judge reply.

#include "vipscene/config.hpp"
#include "vipscene/fixtures.hpp"
#include "vipscene/fpveval.hpp"
#include "vipscene/log.hpp"
#include "vipscene/mllm.hpp"
#include "vipscene/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vipscene;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitStage = 4;
constexpr int kExitParse = 5;

struct Common {
  std::string config;
  std::string out_dir = ".";

  PipelineConfig load() const { return config.empty() ? PipelineConfig{} : load_config(config); }
  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", c.out_dir, "Directory for all outputs")->capture_default_str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::ParseFailure:
  case ErrorCode::MissingMarker: return kExitParse;
  case ErrorCode::MissingFile:
  case ErrorCode::BadMagic:
  case ErrorCode::TruncatedPayload:
  case ErrorCode::PayloadSizeMismatch:
  case ErrorCode::UnsupportedDtype:
  case ErrorCode::ShapeMismatch:
  case ErrorCode::DanglingTrackRef:
  case ErrorCode::InvalidManifest:
  case ErrorCode::InvalidCatalog:
  case ErrorCode::InvalidDocument:
  case ErrorCode::InvalidConfig:
  case ErrorCode::UnknownKind:
  case ErrorCode::LengthMismatch: return kExitInput;
  default: return kExitStage;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string cell; std::getline(in, cell, ',');) {
    std::size_t used = 0;
    out.push_back(std::stod(cell, &used));
    if (used != cell.size()) throw Error(ErrorCode::InvalidDocument, "not a number: " + cell);
  }
  return out;
}

void write_image(const fs::path& stem, const RasterImage& img, bool png) {
  write_ppm(fs::path(stem).replace_extension(".ppm"), img);
  if (png) write_png(fs::path(stem).replace_extension(".png"), img);
}

} // namespace

int main(int argc, char** argv) {
  set_log_sink([](const json& event) { std::cerr << event.dump() << '\n'; });

  CLI::App app{"Video-perception scene reconstruction and first-person-view scoring"};
  app.require_subcommand(1);
  std::function<int()> action;

  // ingest
  Common ingest_c;
  std::string manifest;
  auto* ingest = app.add_subcommand("ingest", "Load a frameset, estimate metric scale and the floor plane");
  add_common(ingest, ingest_c);
  ingest->add_option("--manifest", manifest, "Frameset manifest")->required();
  ingest->callback([&] {
    action = [&] {
      const IngestResult r = ingest_stage(manifest, ingest_c.load());
      write_json_file(ingest_c.out("ingest.json"),
                      {{"scale", r.scale},
                       {"floor_fallback", r.floor_fallback},
                       {"ground", {{"normal", {r.ground.normal.x(), r.ground.normal.y(), r.ground.normal.z()}},
                                   {"offset", r.ground.offset}}},
                       {"frames", r.frames.frames.size()},
                       {"tracks", r.frames.tracks.size()}});
      return 0;
    };
  });

  // extract
  Common extract_c;
  auto* extract = app.add_subcommand("extract", "Extract per-object point clouds");
  add_common(extract, extract_c);
  extract->add_option("--manifest", manifest, "Frameset manifest")->required();
  extract->callback([&] {
    action = [&] {
      const PipelineConfig cfg = extract_c.load();
      write_object_set(extract_c.out_dir, extract_stage(ingest_stage(manifest, cfg), cfg));
      return 0;
    };
  });

  // orient
  Common orient_c;
  std::string objects_path;
  auto* orient = app.add_subcommand("orient", "Fit yaw and oriented boxes to extracted objects");
  add_common(orient, orient_c);
  orient->add_option("--objects", objects_path, "objects.json from extract")->required();
  orient->callback([&] {
    action = [&] {
      ObjectSet set = read_object_set(objects_path);
      orient_stage(set, orient_c.load());
      write_object_set(orient_c.out_dir, set);
      return 0;
    };
  });

  // retrieve
  Common retrieve_c;
  std::string catalog_dir;
  auto* retrieve = app.add_subcommand("retrieve", "Pick and register an asset for every object");
  add_common(retrieve, retrieve_c);
  retrieve->add_option("--objects", objects_path, "objects.json from extract or orient")->required();
  retrieve->add_option("--catalog", catalog_dir, "Asset catalog directory")->required();
  retrieve->callback([&] {
    action = [&] {
      const PipelineConfig cfg = retrieve_c.load();
      const ObjectSet set = read_object_set(objects_path);
      const AssetCatalog catalog = load_catalog(catalog_dir);
      std::vector<RetrievalRecord> records;
      const LayoutDocument doc = retrieve_stage(set, catalog, cfg, &records);
      write_layout(retrieve_c.out("layout.json"), doc);
      write_json_file(retrieve_c.out("retrieval.json"), to_json(records));
      return 0;
    };
  });

  // refine
  Common refine_c;
  std::string layout_path;
  auto* refine = app.add_subcommand("refine", "Resolve collisions and export the scene");
  add_common(refine, refine_c);
  refine->add_option("--layout", layout_path, "layout.json from retrieve or gen-fixture")->required();
  refine->callback([&] {
    action = [&] {
      const PipelineConfig cfg = refine_c.load();
      LayoutDocument doc = read_layout(layout_path);
      auto [refined, report] = refine_layout(doc.layout, cfg.refine);
      write_json_file(refine_c.out("refine_report.json"), to_json(report));
      write_scene(refine_c.out("scene.json"), export_scene(refined, doc.assets, doc.description));
      doc.layout = std::move(refined);
      write_layout(refine_c.out("refined_layout.json"), doc);
      return 0;
    };
  });

  // run
  Common run_c;
  auto* run = app.add_subcommand("run", "Run every stage from frameset to scene.json");
  add_common(run, run_c);
  run->add_option("--manifest", manifest, "Frameset manifest")->required();
  run->add_option("--catalog", catalog_dir, "Asset catalog directory")->required();
  run->callback([&] {
    action = [&] {
      run_pipeline(manifest, catalog_dir, run_c.load(), run_c.out_dir);
      return 0;
    };
  });

  // render
  Common render_c;
  std::string render_mode, scene_path;
  double yaw_deg = 0, pitch_deg = 0;
  std::vector<double> eye;
  bool png = false;
  auto* render = app.add_subcommand("render", "Render a scene: topdown, fpv or sweep");
  add_common(render, render_c);
  render->add_option("mode", render_mode, "topdown | fpv | sweep")
      ->required()
      ->check(CLI::IsMember({"topdown", "fpv", "sweep"}));
  render->add_option("--scene", scene_path, "scene.json")->required();
  render->add_option("--yaw", yaw_deg, "fpv yaw in degrees");
  render->add_option("--pitch", pitch_deg, "fpv pitch in degrees");
  render->add_option("--eye", eye, "fpv eye x y z (default: sweep center at eye height)")->expected(3);
  render->add_flag("--png", png, "Also write PNG files");
  render->callback([&] {
    action = [&] {
      const PipelineConfig cfg = render_c.load();
      const SceneDocument doc = read_scene(scene_path);
      if (render_mode == "topdown") {
        write_image(render_c.out("topdown"), render_topdown(doc, cfg.topdown_size, cfg.topdown_size), png);
        return 0;
      }
      SweepSpec spec = cfg.sweep;
      spec.center = sweep_center(doc);
      if (render_mode == "fpv") {
        CameraPose pose;
        pose.eye = eye.size() == 3 ? Vec3<double>(eye[0], eye[1], eye[2])
                                   : Vec3<double>(spec.center + Vec3<double>(0, spec.eye_height, 0));
        pose.yaw = yaw_deg * std::numbers::pi / 180;
        pose.pitch = pitch_deg * std::numbers::pi / 180;
        pose.fov = spec.fov;
        pose.width = spec.width;
        pose.height = spec.height;
        write_image(render_c.out("fpv"), render_fpv(doc, pose), png);
        return 0;
      }
      const auto views = render_sweep(doc, spec);
      for (std::size_t k = 0; k < views.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "sweep_%02zu", k);
        write_image(render_c.out(name), views[k], png);
      }
      write_image(render_c.out("sweep_summary"), compose_summary({"sweep", doc.description, {{"scene", views}}}), png);
      return 0;
    };
  });

  // evaluate
  Common eval_c;
  std::string bundles_path, replay_dir;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score methods with a judge model");
  add_common(evaluate_cmd, eval_c);
  evaluate_cmd->add_option("--bundles", bundles_path, "bundles.json listing scenes per method")->required();
  evaluate_cmd->add_option("--replay", replay_dir, "Serve recorded replies from <dir>/<bundle_id>.txt");
  evaluate_cmd->callback([&] {
    action = [&] {
      const PipelineConfig cfg = eval_c.load();
      const auto bundles = load_eval_bundles(bundles_path, cfg.sweep);
      std::shared_ptr<Transport> transport;
      if (replay_dir.empty()) transport = std::make_shared<HttpTransport>(cfg.mllm);
      else transport = std::make_shared<ReplayTransport>(replay_dir);
      const json report = evaluate(bundles, MllmClient(transport, cfg.mllm));
      write_json_file(eval_c.out("eval_report.json"), report);
      return report["aggregate"]["bundles_failed"].get<int>() > 0 ? kExitParse : 0;
    };
  });

  // tau
  Common tau_c;
  std::string list_a, list_b, ratings_path, report_path, variant = "b";
  auto* tau = app.add_subcommand("tau", "Kendall's tau of two lists, or of human ratings against a report");
  add_common(tau, tau_c);
  tau->add_option("--a", list_a, "Comma-separated values");
  tau->add_option("--b", list_b, "Comma-separated values");
  tau->add_option("--ratings", ratings_path, "CSV: scene_id,method,criterion,rank");
  tau->add_option("--report", report_path, "eval_report.json");
  tau->add_option("--variant", variant, "a | b (default: the config's eval.tau)")->check(CLI::IsMember({"a", "b"}));
  tau->callback([&] {
    action = [&] {
      const PipelineConfig cfg = tau_c.load();
      const TauVariant v = tau->count("--variant") ? (variant == "a" ? TauVariant::A : TauVariant::B) : cfg.tau;
      json out;
      if (!ratings_path.empty() && !report_path.empty()) {
        std::ifstream in(report_path);
        if (!in) throw Error(ErrorCode::MissingFile, report_path);
        out = tau_against_report(read_human_ratings(ratings_path), json::parse(in), v);
      } else if (!list_a.empty() && !list_b.empty()) {
        const auto t = kendall_tau(parse_list(list_a), parse_list(list_b), v);
        out = {{"tau", t ? json(*t) : json(nullptr)}};
      } else {
        throw CLI::ValidationError("tau", "give --a and --b, or --ratings and --report");
      }
      write_json_file(tau_c.out("tau.json"), out);
      std::cout << out.dump() << '\n';
      return 0;
    };
  });

  // gen-fixture
  Common fixture_c;
  std::string kind;
  std::uint64_t seed = 0;
  auto* fixture = app.add_subcommand("gen-fixture", "Write a seeded synthetic fixture with ground truth");
  add_common(fixture, fixture_c);
  fixture->add_option("--kind", kind, "room | halo | catalog | collision-scene")->required();
  fixture->add_option("--seed", seed, "Generator seed")->capture_default_str();
  fixture->callback([&] {
    action = [&] {
      gen_fixture(kind, seed, fixture_c.out_dir);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const StageError& e) {
    log_event("error", {{"stage", e.stage()}, {"code", to_string(e.code())}, {"message", e.what()}});
    return exit_code_for(e.code()) == kExitInput ? kExitInput : kExitStage;
  } catch (const Error& e) {
    log_event("error", {{"code", to_string(e.code())}, {"message", e.what()}});
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log_event("error", {{"message", e.what()}});
    return kExitStage;
  }
}
