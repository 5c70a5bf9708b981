#include "oracles.hpp"
#include "test_util.hpp"

#include "vipscene/fixtures.hpp"
#include "vipscene/refine.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace vipscene;
using Catch::Approx;

namespace {

PlacedObject unit_box(const std::string& id, double x, double z, double theta = 0) {
  return PlacedObject(id, "box", {1, 1, 1}, {x, z}, theta, 0, 1);
}

Polygon2Dd big_room() { return Polygon2Dd({{-10, -10}, {10, -10}, {10, 10}, {-10, 10}}); }

SceneLayout random_layout(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-1.5, 1.5), len(0.4, 1.4), ang(0, 3);
  SceneLayout layout;
  for (int i = 0; i < n; ++i) {
    PlacedObject o("o" + std::to_string(i), "box", {len(rng), 1, len(rng)}, {pos(rng), pos(rng)}, ang(rng), 0, 1);
    o.set_position(o.position() + Vec2<double>(0.3 * pos(rng), 0.3 * pos(rng)));
    layout.objects.push_back(o);
  }
  layout.room = Polygon2Dd({{-2, -1.8}, {1.9, -2}, {2.1, 1.7}, {-1.6, 2}});
  layout.sort_objects();
  return layout;
}

// Central difference of the full loss with its own step, one coordinate at a time.
Eigen::VectorXd central_difference(const SceneLayout& layout, const RefineConfig& cfg, double h) {
  const Eigen::VectorXd x0 = layout.positions();
  Eigen::VectorXd g(x0.size());
  SceneLayout probe = layout;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Eigen::VectorXd x = x0;
    x(i) = x0(i) + h;
    probe.set_positions(x);
    const double up = total_loss(probe, cfg).value;
    x(i) = x0(i) - h;
    probe.set_positions(x);
    const double down = total_loss(probe, cfg).value;
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

} // namespace

TEST_CASE("position loss", "[refine]") {
  SceneLayout layout;
  layout.objects = {unit_box("a", 0, 0), unit_box("b", 3, 0)};
  CHECK(position_loss(layout) == 0);
  layout.objects[0].set_position({0.3, 0.4});
  CHECK(position_loss(layout) == Approx(0.25).margin(1e-15));

  std::mt19937_64 rng(1);
  const SceneLayout r = random_layout(rng, 8);
  double sum = 0;
  for (const auto& o : r.objects) {
    const double dx = o.position().x() - o.original_position.x(), dz = o.position().y() - o.original_position.y();
    sum += dx * dx + dz * dz;
  }
  CHECK(position_loss(r) == Approx(sum).margin(1e-12));
}

TEST_CASE("overlap loss", "[refine]") {
  SceneLayout layout;
  layout.objects = {unit_box("a", 0, 0), unit_box("b", 2, 0)};
  CHECK(overlap_loss(layout) == 0);
  layout.objects[1] = unit_box("b", 0.5, 0);
  CHECK(overlap_loss(layout) == Approx(0.5));

  SECTION("vertical separation gates the overlap") {
    layout.objects[1] = PlacedObject("b", "shelf", {1, 0.3, 1}, {0.5, 0}, 0, 1.5, 1.8);
    CHECK(overlap_loss(layout) == 0);
  }

  SECTION("three rotated rectangles against Monte-Carlo pair areas") {
    const std::array<std::tuple<double, double, double, double, double>, 3> spec{
        {{1.2, 0.7, 0.0, 0.0, 0.3}, {0.9, 0.8, 0.5, 0.2, 1.1}, {1.0, 0.5, 0.2, 0.5, 2.0}}};
    SceneLayout three;
    std::vector<std::vector<Vec2<double>>> rects;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto [w, d, x, z, t] = spec[i];
      three.objects.push_back(PlacedObject("r" + std::to_string(i), "box", {w, 1, d}, {x, z}, t, 0, 1));
      rects.push_back(oracle::rectangle(w, d, x, z, t));
    }
    double mc_total = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        const double mc = oracle::mc_intersection_area(rects[i], rects[j], 1'000'000, 40 + i * 3 + j);
        CHECK(std::abs(pair_overlap(three.objects[i], three.objects[j]) - mc) < 2e-3);
        mc_total += mc;
      }
    CHECK(std::abs(overlap_loss(three) - mc_total) < 6e-3);
  }
}

TEST_CASE("boundary loss", "[refine]") {
  SceneLayout layout;
  layout.objects = {unit_box("a", 0, 0)};
  CHECK(boundary_loss(layout) == 0); // no room
  layout.room = Polygon2Dd({{-2, -2}, {0, -2}, {0, 2}, {-2, 2}});
  CHECK(boundary_loss(layout) == Approx(0.5));
  layout.objects[0].set_position({-1, 0});
  CHECK(boundary_loss(layout) == 0);

  // fully outside: area plus area × gap, so the slope still points home
  layout.objects[0].set_position({3, 0});
  CHECK(boundary_loss(layout) == Approx(1 + 1 * 2.5));
}

TEST_CASE("total loss", "[refine]") {
  SceneLayout layout;
  layout.objects = {unit_box("a", 0, 0), unit_box("b", 2, 0)};
  layout.room = big_room();
  CHECK(total_loss(layout, {}).value == 0);

  // L_p = 0.25, L_o = 0.5, L_b = 0
  layout.objects[1] = PlacedObject("b", "box", {1, 1, 1}, {0.8, 0}, 0, 0, 1);
  layout.objects[1].set_position({0.5, 0});
  layout.objects[0].set_position({0, 0});
  layout.objects[1].original_position = {0.5, 0.5};
  const TotalLoss t = total_loss(layout, {});
  CHECK(t.components.position == Approx(0.25));
  CHECK(t.components.overlap == Approx(0.5));
  CHECK(t.components.boundary == 0);
  CHECK(t.value == Approx(5.25));

  std::mt19937_64 rng(2);
  RefineConfig cfg;
  cfg.lambda_o = 3.5;
  cfg.lambda_b = 7.25;
  for (int trial = 0; trial < 10; ++trial) {
    const SceneLayout r = random_layout(rng, 6);
    const double manual = position_loss(r) + 3.5 * overlap_loss(r) + 7.25 * boundary_loss(r);
    CHECK(total_loss(r, cfg).value == Approx(manual).margin(1e-12));
  }
}

TEST_CASE("loss gradient", "[refine]") {
  SECTION("pure position term is 2(l - l_orig)") {
    std::mt19937_64 rng(3);
    RefineConfig cfg;
    cfg.lambda_o = cfg.lambda_b = 0;
    const SceneLayout r = random_layout(rng, 7);
    Eigen::VectorXd expect(2 * r.objects.size());
    for (std::size_t i = 0; i < r.objects.size(); ++i)
      expect.segment<2>(2 * Eigen::Index(i)) = 2 * (r.objects[i].position() - r.objects[i].original_position);
    CHECK((loss_gradient(r, cfg) - expect).cwiseAbs().maxCoeff() < 1e-6);
  }

  SECTION("overlap slope of two unit squares is plus or minus one") {
    SceneLayout layout;
    layout.objects = {unit_box("a", 0, 0), unit_box("b", 0.7, 0)};
    RefineConfig cfg;
    cfg.lambda_o = 1;
    cfg.lambda_b = 0;
    const Eigen::VectorXd g = loss_gradient(layout, cfg);
    CHECK(g(0) == Approx(1).margin(1e-4));
    CHECK(g(2) == Approx(-1).margin(1e-4));
    CHECK(std::abs(g(1)) < 1e-4);
    CHECK(std::abs(g(3)) < 1e-4);
  }

  SECTION("zero at a feasible layout resting at its anchors") {
    SceneLayout layout;
    layout.objects = {unit_box("a", 0, 0), unit_box("b", 2, 0)};
    layout.room = big_room();
    CHECK(loss_gradient(layout, {}).cwiseAbs().maxCoeff() < 1e-9);
  }

  SECTION("agrees with an independent Richardson-extrapolated difference") {
    std::mt19937_64 rng(4);
    const RefineConfig cfg;
    for (int trial = 0; trial < 10; ++trial) {
      const SceneLayout r = random_layout(rng, 5);
      const double h = cfg.fd_step;
      const Eigen::VectorXd coarse = central_difference(r, cfg, h);
      const Eigen::VectorXd fine = central_difference(r, cfg, h / 2);
      const Eigen::VectorXd richardson = (4 * fine - coarse) / 3;
      CHECK((loss_gradient(r, cfg) - richardson).cwiseAbs().maxCoeff() < 1e-4);
    }
  }
}

TEST_CASE("refine_layout", "[refine]") {
  SECTION("collision-free layouts are left alone") {
    SceneLayout layout;
    layout.objects = {unit_box("a", 0, 0), unit_box("b", 2, 0)};
    layout.room = big_room();
    const auto [out, report] = refine_layout(layout, {});
    CHECK(report.reason == Termination::Eliminated);
    CHECK(report.iterations == 0);
    CHECK(out.positions() == layout.positions());
    for (const auto& [id, d] : report.displacement) CHECK(d == 0);
  }

  SECTION("two squares overlapping by 0.2 push apart symmetrically") {
    SceneLayout layout;
    layout.objects = {unit_box("a", 0, 0), unit_box("b", 0.8, 0)};
    layout.room = big_room();
    const auto [out, report] = refine_layout(layout, {});
    CHECK(report.reason == Termination::Eliminated);
    CHECK(overlap_loss(out) <= 1e-6);
    for (const auto& [id, d] : report.displacement) CHECK(d <= 0.25);
    // the cheapest separation moves each square 0.1 m, costing 0.02
    CHECK(report.final_loss == Approx(0.02).margin(1e-3));
  }

  SECTION("an object outside the room is pulled in") {
    SceneLayout layout;
    layout.objects = {unit_box("a", 6, 0)};
    layout.room = Polygon2Dd({{-3, -3}, {3, -3}, {3, 3}, {-3, 3}});
    const auto [out, report] = refine_layout(layout, {});
    CHECK(boundary_loss(out) <= 1e-6);
    CHECK(polygon_area(convex_clip(out.objects[0].footprint(), *out.room)) == Approx(1).margin(1e-6));
  }

  SECTION("zero weights keep every anchor") {
    std::mt19937_64 rng(5);
    SceneLayout layout = random_layout(rng, 6);
    for (auto& o : layout.objects) o.set_position(o.original_position);
    RefineConfig cfg;
    cfg.lambda_o = cfg.lambda_b = 0;
    const auto [out, report] = refine_layout(layout, cfg);
    CHECK((out.positions() - layout.positions()).cwiseAbs().maxCoeff() <= 1e-9);
  }

  SECTION("deterministic") {
    const SceneLayout layout = make_collision_scene(3);
    const auto a = refine_layout(layout, {});
    const auto b = refine_layout(layout, {});
    CHECK(a.first.positions() == b.first.positions());
    CHECK(a.second.loss_trace == b.second.loss_trace);
  }
}

TEST_CASE("layout documents round-trip", "[refine]") {
  LayoutDocument doc;
  doc.description = "two boxes";
  doc.layout.objects = {unit_box("a", 0.25, -1), PlacedObject("b", "shelf", {1, 0.3, 0.4}, {2, 1}, 1.3, 1.5, 1.8)};
  doc.layout.objects[1].set_position({2.1, 0.9});
  doc.layout.room = big_room();
  doc.assets = {{"a", "box_0"}, {"b", std::nullopt}};
  const LayoutDocument back = layout_from_json(to_json(doc));
  CHECK(to_json(back) == to_json(doc));
  CHECK(back.layout.objects[1].original_position == Vec2<double>(2, 1));
  CHECK(back.layout.objects[1].position() == Vec2<double>(2.1, 0.9));

  auto bad = to_json(doc);
  bad["room"] = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  CHECK_THROWS_MATCHES(layout_from_json(bad), Error, test::has_code(ErrorCode::NonConvexInput));
  bad = to_json(doc);
  bad.erase("objects");
  CHECK_THROWS_MATCHES(layout_from_json(bad), Error, test::has_code(ErrorCode::InvalidDocument));
}
