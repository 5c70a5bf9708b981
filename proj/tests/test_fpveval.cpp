#include "oracles.hpp"
#include "test_util.hpp"

#include "vipscene/fpveval.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace vipscene;
using Catch::Approx;

namespace {

const std::string kDescription = "A bedroom with a double bed, two nightstands and a wardrobe.";

std::vector<RasterImage> views(int n, int w, int h, std::uint8_t shade) {
  std::vector<RasterImage> out;
  for (int i = 0; i < n; ++i) out.emplace_back(w, h, Rgb{shade, std::uint8_t(i), 0});
  return out;
}

std::string appendix_reply(const Eigen::Matrix<int, Eigen::Dynamic, 3>& r) {
  static const char* ordinal[] = {"first", "second", "third"};
  std::string s = "Analysis:\n1. Semantic Correctness: The first one is fine.\n\nFinal answer:\n";
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    s += std::string("The ") + ordinal[i] + " one: " + std::to_string(r(i, 0)) + " " + std::to_string(r(i, 1)) + " " +
         std::to_string(r(i, 2)) + "\n";
  return s;
}

} // namespace

TEST_CASE("sweep poses", "[fpveval]") {
  SweepSpec spec;
  spec.center = {1, 0, -2};
  const auto poses = sweep_poses(spec);
  REQUIRE(poses.size() == 12);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    CHECK(poses[k].yaw * 180.0 / std::numbers::pi == Approx(30.0 * double(k)).margin(1e-9));
    CHECK(poses[k].pitch == 0);
    CHECK((poses[k].eye - Vec3<double>(1, 1.5, -2)).norm() == 0);
    if (k > 0) CHECK(poses[k].yaw - poses[k - 1].yaw == Approx(2 * std::numbers::pi / 12).margin(1e-12));
  }
  spec.n_views = 2;
  const auto two = sweep_poses(spec);
  CHECK(two[0].yaw == 0);
  CHECK(two[1].yaw == Approx(std::numbers::pi).margin(1e-12));
  spec.n_views = 1;
  CHECK_THROWS_MATCHES(sweep_poses(spec), Error, test::has_code(ErrorCode::DegenerateInput));
}

TEST_CASE("compose_summary", "[fpveval]") {
  EvalBundle one{"b", "", {{"m", views(2, 4, 4, 9)}}};
  const RasterImage img = compose_summary(one);
  CHECK(img.width == 8);
  CHECK(img.height == 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(img.at(x, y) == one.methods[0].sweep_images[0].at(x, y));
  CHECK(img.at(5, 2) == one.methods[0].sweep_images[1].at(1, 2));

  EvalBundle three{"b", "", {{"a", views(12, 256, 256, 1)}, {"b", views(12, 256, 256, 2)}, {"c", views(12, 256, 256, 3)}}};
  const RasterImage big = compose_summary(three);
  CHECK(big.width == 3072);
  CHECK(big.height == 768);
  CHECK(big.at(0, 300)[0] == 2); // second method is the second row

  EvalBundle mixed{"b", "", {{"a", views(2, 4, 4, 1)}, {"b", views(2, 5, 4, 2)}}};
  CHECK_THROWS_MATCHES(compose_summary(mixed), Error, test::has_code(ErrorCode::ShapeMismatch));
}

TEST_CASE("judge prompts", "[fpveval]") {
  CHECK(build_fpv_prompt(kDescription) == test::read_bytes(test::data_dir() / "fpv_prompt.golden.txt"));
  CHECK(build_topdown_prompt(kDescription) == test::read_bytes(test::data_dir() / "topdown_prompt.golden.txt"));

  const std::string a = build_fpv_prompt("A bedroom with a large bed");
  CHECK(a.find("Text Description: A bedroom with a large bed\n") != std::string::npos);
  CHECK(a.find(kDescriptionPlaceholder) == std::string::npos);

  // two descriptions differ only inside the substituted span
  const std::string b = build_fpv_prompt("A kitchen");
  const std::string marker = "Text Description: ";
  const auto at = a.find(marker) + marker.size();
  CHECK(a.substr(0, at) == b.substr(0, at));
  CHECK(a.substr(at + std::string("A bedroom with a large bed").size()) == b.substr(at + std::string("A kitchen").size()));

  const std::string top = build_topdown_prompt("x");
  CHECK(top.find("Provide only your final ranking") != std::string::npos);
  CHECK(top.find("Analysis:") == std::string::npos);

  CHECK(build_fpv_prompt("x", 4).find("four methods") != std::string::npos);
  CHECK(build_fpv_prompt("x", 4).find("The fourth one: x x x") != std::string::npos);
  CHECK_THROWS_MATCHES(build_fpv_prompt("x", 1), Error, test::has_code(ErrorCode::InvalidConfig));
}

TEST_CASE("parse_rankings", "[fpveval]") {
  const RankMatrix m = parse_rankings("Final answer:\nThe first one: 1 2 1\nThe second one: 2 1 3\nThe third one: 3 3 2");
  Eigen::Matrix<int, 3, 3> expect;
  expect << 1, 2, 1, 2, 1, 3, 3, 3, 2;
  CHECK(m.ranks == expect);
  CHECK(m.ties == std::array<bool, 3>{false, false, false});

  const RankMatrix last = parse_rankings(
      "Final answer:\nThe first one: 3 3 3\nThe second one: 2 2 2\nThe third one: 1 1 1\n"
      "Let me reconsider.\nFINAL ANSWER:\n**The first one:** 1 1 1\n- The second one: 2, 2, 2\nThe third one: 3 3 3\n");
  CHECK(last.ranks(0, 0) == 1);
  CHECK(last.ranks(2, 2) == 3);

  CHECK_THROWS_MATCHES(parse_rankings("Final answer: cats"), Error, test::has_code(ErrorCode::ParseFailure));
  CHECK_THROWS_MATCHES(parse_rankings("no marker here"), Error, test::has_code(ErrorCode::MissingMarker));
  CHECK_THROWS_MATCHES(parse_rankings("Final answer:\nThe first one: 1 2 4\nThe second one: 2 1 3\nThe third one: 3 3 2"),
                       Error, test::has_code(ErrorCode::ParseFailure));
  CHECK_THROWS_MATCHES(parse_rankings("Final answer:\nThe first one: 1 2\nThe second one: 2 1 3\nThe third one: 3 3 2"),
                       Error, test::has_code(ErrorCode::ParseFailure));

  const RankMatrix tied = parse_rankings("Final answer:\nThe first one: 1 1 1\nThe second one: 1 1 1\nThe third one: 1 1 1");
  CHECK(tied.ties == std::array<bool, 3>{true, true, true});
  const auto s = rank_scores(tied);
  CHECK((s.array() == 3).all());

  SECTION("random matrices survive the appendix format") {
    std::mt19937_64 rng(77);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::Matrix<int, Eigen::Dynamic, 3> r(3, 3);
      for (int c = 0; c < 3; ++c) {
        std::array<int, 3> perm{1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < 3; ++i) r(i, c) = trial % 10 == 0 ? int(1 + rng() % 3) : perm[std::size_t(i)];
      }
      try {
        if (parse_rankings(appendix_reply(r)).ranks != r) ++failures;
        RankMatrix rm;
        rm.ranks = r;
        if (parse_rankings(build_reply(rm)).ranks != r) ++failures;
      } catch (const Error&) {
        ++failures;
      }
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("rank scores", "[fpveval]") {
  const RankMatrix m = parse_rankings("Final answer:\nThe first one: 1 2 1\nThe second one: 2 1 3\nThe third one: 3 3 2");
  const auto s = rank_scores(m);
  CHECK(s(0, 0) == 3);
  CHECK(s(1, 0) == 2);
  CHECK(s(2, 0) == 1);
  CHECK(parse_topdown_ranking("Final answer:\n2 1 3\n") == std::vector<int>{2, 1, 3});
  CHECK_THROWS_MATCHES(parse_topdown_ranking("Final answer:\n2 1\n"), Error, test::has_code(ErrorCode::ParseFailure));
}

TEST_CASE("kendall_tau", "[fpveval]") {
  CHECK(*kendall_tau({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(*kendall_tau({1, 2, 3}, {3, 2, 1}) == -1.0);
  CHECK_FALSE(kendall_tau({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_FALSE(kendall_tau({1}, {2}).has_value());
  CHECK_THROWS_MATCHES(kendall_tau({1, 2}, {1}), Error, test::has_code(ErrorCode::LengthMismatch));
  CHECK_THROWS_MATCHES(kendall_tau({}, {}), Error, test::has_code(ErrorCode::LengthMismatch));

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = double(rng() % 4);
      b[i] = double(rng() % 4);
    }
    const auto tb = kendall_tau(a, b, TauVariant::B);
    const double ob = oracle::tau_b(a, b);
    if (std::isnan(ob)) {
      CHECK_FALSE(tb.has_value());
    } else {
      REQUIRE(tb.has_value());
      CHECK(*tb == ob);
    }
    if (tb) CHECK(*kendall_tau(a, b, TauVariant::A) == oracle::tau_a(a, b));
  }
}
