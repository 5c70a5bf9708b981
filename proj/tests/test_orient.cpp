#include "oracles.hpp"

#include "vipscene/fixtures.hpp"
#include "vipscene/orient.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace vipscene;
using Catch::Approx;

namespace {

const Planed kFloor{Vec3<double>::UnitY(), 0};

// Grid-sampled box surface yawed by phi about its center.
PointCloud box_cloud(const Vec3<double>& size, double phi, const Vec3<double>& center) {
  const PointCloud local = oracle::grid_box_surface(size, 0.03);
  return (yaw_rotation(phi) * local).colwise() + center;
}

double angle_mod_pi(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

} // namespace

TEST_CASE("estimate_orientation", "[orient]") {
  const Vec3<double> size(2, 1, 0.8);
  const PointCloud flat = box_cloud(size, 0, {0, 0.5, 0});
  CHECK(angle_mod_pi(estimate_orientation(flat, kFloor), 0) < 1e-6);

  const double phi = std::numbers::pi / 6;
  CHECK(estimate_orientation(box_cloud(size, phi, {1, 0.5, 2}), kFloor) == Approx(phi).margin(1e-3));

  SECTION("tilted ground") {
    // the reconstruction frame is the metric frame tipped 10 degrees about X
    const Mat3<double> tilt = Eigen::AngleAxisd(10 * std::numbers::pi / 180, Vec3<double>::UnitX()).toRotationMatrix();
    const PointCloud cloud = tilt * box_cloud(size, phi, {0, 0.5, 0});
    const Planed ground{tilt * Vec3<double>::UnitY(), 0};
    CHECK(estimate_orientation(cloud, ground) == Approx(phi).margin(2e-2));
  }
}

TEST_CASE("fit_obb", "[orient]") {
  SECTION("unit cube") {
    const PointCloud cube = box_cloud({1, 1, 1}, 0, {0.5, 0.5, 0.5});
    const OrientedBox box = fit_obb(cube, 0, kFloor);
    for (int k = 0; k < 3; ++k) CHECK(box.size(k) == Approx(1).epsilon(0.02));
    CHECK((box.center - Vec3<double>(0.5, 0.5, 0.5)).norm() < 1e-2);
  }
  SECTION("rotated 2 x 1 x 0.5") {
    const Vec3<double> size(2, 1, 0.5);
    const double phi = std::numbers::pi / 4;
    const PointCloud cloud = box_cloud(size, phi, {0, 0.5, 0});
    const OrientedBox box = fit_obb(cloud, estimate_orientation(cloud, kFloor), kFloor);
    for (int k = 0; k < 3; ++k) CHECK(box.size(k) == Approx(size(k)).epsilon(0.03));
  }
  SECTION("far outliers barely move the extents") {
    const Vec3<double> size(1.5, 0.8, 0.6);
    PointCloud cloud = box_cloud(size, 0.3, {0, 0.4, 0});
    const OrientedBox clean = fit_obb(cloud, 0.3, kFloor);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> far(-20, 20);
    const Eigen::Index n = cloud.cols(), extra = n / 100;
    cloud.conservativeResize(3, n + extra);
    for (Eigen::Index i = n; i < n + extra; ++i) cloud.col(i) = Vec3<double>(far(rng), far(rng), far(rng));
    const OrientedBox noisy = fit_obb(cloud, 0.3, kFloor);
    for (int k = 0; k < 3; ++k) CHECK(noisy.size(k) == Approx(clean.size(k)).epsilon(0.03));
  }
}

TEST_CASE("pose pairs", "[orient]") {
  const OrientedBox origin;
  const PosePair pp = pose_pair(origin);
  CHECK(pp.primary.rotation.isIdentity(1e-15));
  CHECK(pp.primary.translation.isZero());
  CHECK((pp.flipped.rotation - yaw_rotation(std::numbers::pi)).norm() < 1e-12);

  OrientedBox box;
  box.center = {1, 0.5, -2};
  box.size = {2, 1, 0.7};
  box.theta = 0.4;
  const PosePair p = pose_pair(box);
  const PointCloud unit = sample_asset_surface({AssetShape::Kind::Box, {1, 1, 1}}, 200, 1);
  const PointCloud a = p.primary.apply(unit), b = p.flipped.apply(unit);
  CHECK((a.rowwise().minCoeff() - b.rowwise().minCoeff()).norm() < 1e-12);
  CHECK((a.rowwise().maxCoeff() - b.rowwise().maxCoeff()).norm() < 1e-12);

  const RigidTransformd twice = flip_about_vertical(p.flipped);
  CHECK((twice.rotation - p.primary.rotation).norm() < 1e-12);
  CHECK((twice.translation - p.primary.translation).norm() < 1e-12);
}
