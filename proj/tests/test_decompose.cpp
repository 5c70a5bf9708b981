#include "oracles.hpp"
#include "test_util.hpp"

#include "vipscene/decompose.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace vipscene;

namespace {

BinaryMask filled(Eigen::Index h, Eigen::Index w, Eigen::Index r0, Eigen::Index c0, Eigen::Index rh, Eigen::Index cw) {
  BinaryMask m(h, w);
  for (Eigen::Index r = r0; r < r0 + rh; ++r)
    for (Eigen::Index c = c0; c < c0 + cw; ++c) m.set(r, c, true);
  return m;
}

BinaryMask random_blob(std::mt19937_64& rng, Eigen::Index h, Eigen::Index w) {
  // union of a few discs and rectangles, with some salt
  BinaryMask m(h, w);
  std::uniform_int_distribution<Eigen::Index> ry(0, h - 1), rx(0, w - 1);
  std::uniform_int_distribution<int> rr(2, 9);
  for (int k = 0; k < 4; ++k) {
    const Eigen::Index cy = ry(rng), cx = rx(rng);
    const int rad = rr(rng);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x)
        if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= rad * rad) m.set(y, x, true);
  }
  for (int k = 0; k < 30; ++k) m.set(ry(rng), rx(rng), rng() % 2 == 0);
  return m;
}

FrameSet planar_frame(Eigen::Index h, Eigen::Index w) {
  FrameSet fs;
  Frame f;
  f.frame_id = "f0";
  f.point_map.resize(3, h * w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) f.point_map.col(r * w + c) = Vec3<double>(c * 0.1, 0, r * 0.1);
  f.valid_mask = Grid<std::uint8_t>::Constant(h, w, 1);
  f.mono_depth = f.recon_depth = Grid<double>::Ones(h, w);
  fs.frames.push_back(f);
  return fs;
}

} // namespace

TEST_CASE("erosion_radius", "[decompose]") {
  CHECK(erosion_radius(BinaryMask(10, 10)) == 0);
  CHECK(erosion_radius(filled(100, 100, 0, 0, 100, 100)) == 2);
  CHECK(erosion_radius(filled(1000, 1000, 0, 0, 1000, 1000)) == 15);
  CHECK(erosion_radius(filled(5, 5, 2, 2, 1, 1)) == 1); // floored at r_min
}

TEST_CASE("erode_mask", "[decompose]") {
  const BinaryMask square = filled(9, 9, 2, 2, 5, 5);
  CHECK(erode_mask(square, 0) == square);
  CHECK(erode_mask(square, 1) == filled(9, 9, 3, 3, 3, 3));

  // the image border counts as background
  CHECK(erode_mask(filled(4, 4, 0, 0, 4, 4), 1) == filled(4, 4, 1, 1, 2, 2));

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask m = random_blob(rng, 24 + trial, 40 - trial);
    const int r = 1 + trial % 5;
    const BinaryMask got = erode_mask(m, r);
    CHECK(got == oracle::erode(m, r));
    CHECK(got.area() == got.recount());
  }
}

TEST_CASE("extract_object_cloud", "[decompose]") {
  FrameSet fs = planar_frame(6, 6);
  fs.tracks["obj0"] = {"chair", {{"f0", filled(6, 6, 1, 2, 2, 2)}}};

  const ObjectInstance o = extract_object_cloud(fs, "obj0", Erosion::Off);
  REQUIRE(o.cloud.cols() == 4);
  CHECK(o.category == "chair");
  PointCloud expect(3, 4);
  expect << 0.2, 0.3, 0.2, 0.3, 0, 0, 0, 0, 0.1, 0.1, 0.2, 0.2;
  CHECK((o.cloud - expect).norm() < 1e-12);

  SECTION("invalid pixels are skipped") {
    fs.frames[0].valid_mask(1, 2) = 0;
    CHECK(extract_object_cloud(fs, "obj0", Erosion::Off).cloud.cols() == 3);
  }
  SECTION("full erosion") {
    fs.tracks["small"] = {"cup", {{"f0", filled(6, 6, 1, 1, 3, 3)}}};
    CHECK(extract_object_cloud(fs, "small", Erosion::On).cloud.cols() == 1);
    ErosionConfig wide;
    wide.r_min = 2;
    CHECK_THROWS_MATCHES(extract_object_cloud(fs, "small", Erosion::On, wide), Error,
                         test::has_code(ErrorCode::EmptyAfterErosion));
  }
  SECTION("unknown object") {
    CHECK_THROWS_MATCHES(extract_object_cloud(fs, "ghost", Erosion::Off), Error,
                         test::has_code(ErrorCode::UnknownObject));
  }
}
