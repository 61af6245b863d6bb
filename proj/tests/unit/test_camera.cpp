#include <doctest.h>

#include <random>

#include "masklift/camera.hpp"
#include "masklift/error.hpp"
#include "oracles.hpp"

using namespace masklift;

namespace {

CameraPose pose_with(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  CameraPose p;
  p.rotation = r;
  p.translation = t;
  return p;
}

void check_point(const Point3& got, const Point3& want, double tol = 1e-12) {
  CHECK((got - want).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace

TEST_CASE("unproject_pixel evaluates the back-projection on worked examples") {
  const CameraIntrinsics unit{1.0, 1.0, 0.0, 0.0};
  check_point(unproject_pixel({2, 3}, 2.0, unit, {}), {4.0, 6.0, 2.0});

  const auto shifted = pose_with(Eigen::Matrix3d::Identity(), {1.0, 0.0, 0.0});
  check_point(unproject_pixel({2, 3}, 2.0, unit, shifted), {3.0, 6.0, 2.0});

  // Hand-evaluated with M^-1 = [[1/2, 0, -1/2], [0, 1/2, -1/2], [0, 0, 1]]:
  // 4 * M^-1 [3 5 1] = (4, 8, 4).
  const CameraIntrinsics k2{2.0, 2.0, 1.0, 1.0};
  check_point(unproject_pixel({3, 5}, 4.0, k2, {}), {4.0, 8.0, 4.0});
}

TEST_CASE("unproject_pixel rejects invalid depth and poses") {
  const CameraIntrinsics unit{1.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(unproject_pixel({0, 0}, 0.0, unit, {}), Error);
  CHECK_THROWS_AS(unproject_pixel({0, 0}, -1.0, unit, {}), Error);
  try {
    unproject_pixel({0, 0}, 0.0, unit, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidDepth);
  }
  auto skewed = pose_with(Eigen::Matrix3d::Identity() * 1.1, Eigen::Vector3d::Zero());
  try {
    unproject_pixel({0, 0}, 1.0, unit, skewed);
    FAIL("expected invalid pose");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidPose);
  }
  // A reflection is orthonormal but has det -1.
  Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
  flip(2, 2) = -1.0;
  CHECK_FALSE(pose_with(flip, Eigen::Vector3d::Zero()).is_valid());
}

TEST_CASE("project_point inverts unproject_pixel and flags points behind the camera") {
  const CameraIntrinsics unit{1.0, 1.0, 0.0, 0.0};
  const auto proj = project_point({4.0, 6.0, 2.0}, unit, {});
  REQUIRE(proj);
  CHECK(proj->pixel.u == doctest::Approx(2.0));
  CHECK(proj->pixel.v == doctest::Approx(3.0));
  CHECK(proj->depth == doctest::Approx(2.0));
  CHECK_FALSE(project_point({0.0, 0.0, -1.0}, unit, {}));
  CHECK_FALSE(project_point({1.0, 1.0, 0.0}, unit, {}));
}

TEST_CASE("round trip unproject(project(p)) over random poses") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> focal(100.0, 900.0);
  int checked = 0;
  while (checked < 2000) {
    const CameraIntrinsics intr{focal(rng), focal(rng), coord(rng) * 40, coord(rng) * 40};
    const auto pose = pose_with(oracle::random_rotation(rng), {coord(rng), coord(rng), coord(rng)});
    const Point3 p{coord(rng), coord(rng), coord(rng)};
    const auto proj = project_point(p, intr, pose);
    if (!proj) continue;
    check_point(unproject_pixel(proj->pixel, proj->depth, intr, pose), p, 1e-6);
    ++checked;
  }
}

TEST_CASE("unproject_frame filters invalid depth and keeps row-major order") {
  const CameraIntrinsics unit{1.0, 1.0, 0.0, 0.0};
  DepthFrame empty{2, 2, {0, 0, 0, 0}, 1000.0};
  CHECK(unproject_frame(empty, unit, {}).empty());

  DepthFrame diag{2, 2, {1000, 0, 0, 1000}, 1000.0};
  const auto pts = unproject_frame(diag, unit, {});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].u == 0);
  CHECK(pts[0].v == 0);
  CHECK(pts[1].u == 1);
  CHECK(pts[1].v == 1);
  check_point(pts[1].point, {1.0, 1.0, 1.0});

  // 20 m is beyond the default 10 m range.
  DepthFrame far{1, 1, {20000}, 1000.0};
  CHECK(unproject_frame(far, unit, {}).empty());
  CHECK(unproject_frame(far, unit, {}, {1, 30.0}).size() == 1);

  DepthFrame bad{2, 2, {1, 2, 3}, 1000.0};
  try {
    unproject_frame(bad, unit, {});
    FAIL("expected malformed frame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedFrame);
  }
}

TEST_CASE("unproject_frame stride keeps exactly the lattice pixels") {
  DepthFrame frame{5, 4, std::vector<std::uint16_t>(20, 1500), 1000.0};
  frame.depth[2 * 5 + 2] = 0;
  const auto pts = unproject_frame(frame, {1.0, 1.0, 0.0, 0.0}, {}, {2, 10.0});
  // lattice: u in {0, 2, 4}, v in {0, 2}; (2, 2) is invalid.
  REQUIRE(pts.size() == 5);
  for (const auto& p : pts) {
    CHECK(p.u % 2 == 0);
    CHECK(p.v % 2 == 0);
  }
}

TEST_CASE("rigid change of pose preserves pairwise distances of unprojected points") {
  std::mt19937_64 rng(5);
  DepthFrame frame{16, 12, {}, 1000.0};
  std::uniform_int_distribution<int> raw(500, 5000);
  for (int i = 0; i < 16 * 12; ++i) frame.depth.push_back(static_cast<std::uint16_t>(raw(rng)));
  const CameraIntrinsics intr{20.0, 22.0, 8.0, 6.0};
  const auto a = unproject_frame(frame, intr, {});
  const auto b = unproject_frame(
      frame, intr, pose_with(oracle::random_rotation(rng), {0.3, -2.0, 1.5}));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); i += 7) {
    for (std::size_t j = i + 1; j < a.size(); j += 13) {
      CHECK(std::abs((a[i].point - a[j].point).norm() - (b[i].point - b[j].point).norm()) < 1e-9);
    }
  }
}

TEST_CASE("world_from_camera round trips through from_world_from_camera") {
  std::mt19937_64 rng(3);
  const auto pose = pose_with(oracle::random_rotation(rng), {1.0, 2.0, 3.0});
  const auto back = CameraPose::from_world_from_camera(pose.world_from_camera());
  CHECK((back.rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.translation - pose.translation).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((pose.center() - pose.world_from_camera().topRightCorner<3, 1>()).norm() < 1e-12);
}
