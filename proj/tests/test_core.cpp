#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gnrf/core/grid.hpp"
#include "gnrf/core/image.hpp"
#include "gnrf/core/rng.hpp"
#include "gnrf/core/types.hpp"

using namespace gnrf;

namespace {
CameraIntrinsics test_intrinsics() { return CameraIntrinsics(100, 100, 64, 64, 128, 128); }

CameraPose random_pose(Pcg32& rng) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  Quat q = Quat::from_axis_angle(axis.normalized(), rng.uniform(-M_PI, M_PI));
  return CameraPose(q.to_matrix(), Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
}
}  // namespace

TEST_CASE("project: principal point and off-axis point") {
  auto intr = test_intrinsics();
  CameraPose identity;
  auto p = project(Vec3(0, 0, 0.5), intr, identity);
  CHECK(p.in_front);
  CHECK(p.u == doctest::Approx(64.0));
  CHECK(p.v == doctest::Approx(64.0));
  CHECK(p.depth == doctest::Approx(0.5));

  // u = cx + fx * x / z = 64 + 100 * 0.1 / 0.5 = 84
  auto q = project(Vec3(0.1, 0, 0.5), intr, identity);
  CHECK(q.u == doctest::Approx(84.0));
  CHECK(q.v == doctest::Approx(64.0));
  CHECK(q.depth == doctest::Approx(0.5));
}

TEST_CASE("project: behind-camera signal") {
  auto p = project(Vec3(0, 0, -0.1), test_intrinsics(), CameraPose());
  CHECK_FALSE(p.in_front);
  CHECK(p.depth == doctest::Approx(-0.1));
}

TEST_CASE("project/unproject round trip recovers in-frustum points") {
  Pcg32 rng(7);
  auto intr = test_intrinsics();
  for (int t = 0; t < 200; ++t) {
    CameraPose pose = random_pose(rng);
    Vec3 pc(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.2, 2.0));
    Vec3 world = pose.camera_to_world(pc);
    auto pr = project(world, intr, pose);
    REQUIRE(pr.in_front);
    Vec3 back = unproject(pr.u, pr.v, pr.depth, intr, pose);
    CHECK((back - world).norm() < 1e-6);
  }
}

TEST_CASE("project is equivariant under a shared rigid transform") {
  Pcg32 rng(11);
  auto intr = test_intrinsics();
  for (int t = 0; t < 100; ++t) {
    CameraPose pose = random_pose(rng);
    Vec3 world(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    auto before = project(world, intr, pose);

    CameraPose xform = random_pose(rng);  // world' = R*world + t
    Vec3 world2 = xform.rotation * world + xform.translation;
    // pose' such that pose'(world') == pose(world)
    Mat3 r2 = pose.rotation * xform.rotation.transpose();
    Vec3 t2 = pose.translation - r2 * xform.translation;
    auto after = project(world2, intr, CameraPose(r2, t2));
    if (before.in_front) {
      CHECK(std::abs(before.u - after.u) < 1e-6);
      CHECK(std::abs(before.v - after.v) < 1e-6);
      CHECK(std::abs(before.depth - after.depth) < 1e-6);
    }
  }
}

TEST_CASE("camera pose invariants enforced") {
  Mat3 bad = Mat3::Identity() * 2.0;
  CHECK_THROWS(CameraPose(bad, Vec3::Zero()));
  Mat3 reflect = Mat3::Identity();
  reflect(0, 0) = -1;  // det = -1
  CHECK_THROWS(CameraPose(reflect, Vec3::Zero()));
}

TEST_CASE("look_at points the optical axis at the target") {
  Vec3 eye(0.4, 0.15, 0.58), target(0.15, 0.15, 0.15);
  CameraPose pose = CameraPose::look_at(eye, target);
  auto intr = test_intrinsics();
  auto pr = project(target, intr, pose);
  CHECK(pr.in_front);
  CHECK(std::abs(pr.u - intr.cx) < 1e-9);
  CHECK(std::abs(pr.v - intr.cy) < 1e-9);
  CHECK((pose.camera_center() - eye).norm() < 1e-12);
}

TEST_CASE("bilinear_sample: exact pixels, constants, and cell centers") {
  Image img(8, 8, 1);
  Pcg32 rng(3);
  for (auto& v : img.data) v = rng.next_float();
  float out;
  CHECK(bilinear_sample(img, 3.0, 5.0, &out));
  CHECK(out == doctest::Approx(img.at(5, 3, 0)));

  Image cimg(4, 6, 2, 0.37f);
  float cv[2];
  CHECK(bilinear_sample(cimg, 2.31, 1.77, cv));
  CHECK(cv[0] == doctest::Approx(0.37f));
  CHECK(cv[1] == doctest::Approx(0.37f));

  Image tiny(2, 2, 1);
  tiny.at(0, 0, 0) = 0;
  tiny.at(0, 1, 0) = 1;
  tiny.at(1, 0, 0) = 2;
  tiny.at(1, 1, 0) = 3;
  float mid;
  CHECK(bilinear_sample(tiny, 0.5, 0.5, &mid));
  CHECK(mid == doctest::Approx(1.5));
}

TEST_CASE("bilinear_sample: out-of-bounds returns zeros with invalid flag") {
  Image img(4, 4, 3, 1.0f);
  float out[3] = {9, 9, 9};
  CHECK_FALSE(bilinear_sample(img, -0.1, 2.0, out));
  CHECK(out[0] == 0.0f);
  CHECK_FALSE(bilinear_sample(img, 2.0, 3.5, out));
}

TEST_CASE("bilinear_sample is exact on affine images") {
  const double a = 0.31, b = -0.13, c = 0.4;
  Image img(9, 7, 1);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 7; ++x) img.at(y, x, 0) = static_cast<float>(a * x + b * y + c);
  Pcg32 rng(5);
  for (int t = 0; t < 200; ++t) {
    double u = rng.uniform(0, 6), v = rng.uniform(0, 8);
    float out;
    REQUIRE(bilinear_sample(img, u, v, &out));
    CHECK(std::abs(out - (a * u + b * v + c)) < 1e-6);
  }
}

TEST_CASE("quaternion_geodesic_abs_dot basics") {
  Quat a(0.3, -0.5, 0.7, 0.2);
  CHECK(quaternion_geodesic_abs_dot(a, a) == doctest::Approx(1.0));
  Quat na(-a.w, -a.x, -a.y, -a.z);
  CHECK(quaternion_geodesic_abs_dot(a, na) == doctest::Approx(1.0));
  CHECK(quaternion_geodesic_abs_dot(Quat(1, 0, 0, 0), Quat(0, 0, 0, 1)) == doctest::Approx(0.0));
}

TEST_CASE("quaternions normalize on construction and reject zero") {
  Quat q(2, 0, 0, 0);
  CHECK(q.w == doctest::Approx(1.0));
  CHECK(std::abs(q.norm() - 1.0) < 1e-12);
  CHECK_THROWS(Quat(0, 0, 0, 0));
}

TEST_CASE("voxel_index: floor semantics and half-open range") {
  WorkspaceGrid grid = WorkspaceGrid::standard();  // voxel 0.0075
  auto v = voxel_index(Vec3(0.0001, 0.0001, 0.0001), grid);
  REQUIRE(v.has_value());
  CHECK(*v == VoxelIndex{0, 0, 0});

  CHECK_FALSE(voxel_index(grid.origin + Vec3(0.3, 0.3, 0.3), grid).has_value());
  CHECK_FALSE(voxel_index(Vec3(-0.001, 0.1, 0.1), grid).has_value());

  Vec3 center = grid.grid_point(5, 6, 7);
  auto c = voxel_index(center, grid);
  REQUIRE(c.has_value());
  CHECK(*c == VoxelIndex{5, 6, 7});
}

TEST_CASE("workspace grid points lie strictly inside the cube") {
  WorkspaceGrid grid = WorkspaceGrid::standard();
  CHECK(grid.voxel_size() == 0.3 / 40);
  for (int k : {0, 20, 39})
    for (int j : {0, 13, 39})
      for (int i : {0, 7, 39}) {
        Vec3 p = grid.grid_point(i, j, k);
        for (int a = 0; a < 3; ++a) {
          CHECK(p[a] > grid.origin[a]);
          CHECK(p[a] < grid.origin[a] + grid.side);
        }
      }
}

TEST_CASE("scalar volume trilinear interpolation is exact on trilinear fields") {
  WorkspaceGrid grid(Vec3::Zero(), 0.3, 8);
  ScalarVolume vol(grid);
  auto f = [](const Vec3& p) { return 0.2 + 1.1 * p.x() - 0.7 * p.y() + 0.4 * p.z(); };
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) vol.at(i, j, k) = static_cast<float>(f(grid.grid_point(i, j, k)));
  Pcg32 rng(17);
  for (int t = 0; t < 200; ++t) {
    // stay inside the grid-point convex hull where interpolation reproduces affine fields
    Vec3 p(rng.uniform(0.03, 0.27), rng.uniform(0.03, 0.27), rng.uniform(0.03, 0.27));
    CHECK(std::abs(vol.trilinear(p) - f(p)) < 1e-5);
  }
}

TEST_CASE("ppm round trip preserves quantized bytes") {
  Image img(6, 5, 3);
  Pcg32 rng(23);
  for (auto& v : img.data) v = rng.next_float();
  auto path = std::filesystem::temp_directory_path() / "gnrf_test.ppm";
  write_ppm(path.string(), img);
  Image back = read_ppm(path.string());
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5f / 255.0f + 1e-6f);
  // rewriting the decoded image reproduces the same bytes
  auto path2 = std::filesystem::temp_directory_path() / "gnrf_test2.ppm";
  write_ppm(path2.string(), back);
  Image back2 = read_ppm(path2.string());
  CHECK(back2.data == back.data);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("ray and observation invariants") {
  CHECK_THROWS(Ray(Vec3::Zero(), Vec3(0, 0, 2), 0.1, 1.0));  // non-unit direction
  CHECK_THROWS(Ray(Vec3::Zero(), Vec3(0, 0, 1), 1.0, 0.5));  // t_near >= t_far
  CHECK_THROWS(Ray(Vec3::Zero(), Vec3(0, 0, 1), 0.0, 0.5));  // t_near == 0

  std::vector<View> views(1);
  views[0].image = Image(4, 4, 3);
  CHECK_THROWS(MultiviewObservation(views));  // N >= 2
}

TEST_CASE("aabb intersection") {
  auto hit = intersect_aabb(Vec3(-1, 0.15, 0.15), Vec3(1, 0, 0), Vec3::Zero(), Vec3(0.3, 0.3, 0.3));
  REQUIRE(hit.has_value());
  CHECK(hit->first == doctest::Approx(1.0));
  CHECK(hit->second == doctest::Approx(1.3));
  CHECK_FALSE(intersect_aabb(Vec3(-1, 0.5, 0.15), Vec3(1, 0, 0), Vec3::Zero(), Vec3(0.3, 0.3, 0.3)).has_value());
}

TEST_CASE("pcg32 determinism") {
  Pcg32 a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u32() == b.next_u32());
  Pcg32 c(43);
  CHECK(Pcg32(42).next_u32() != c.next_u32());
}
