#include "latcomp/depth_source.hpp"
#include "latcomp/error.hpp"
#include "latcomp/io.hpp"
#include "latcomp/scene.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace latcomp;

namespace {

RigidPose forward_camera(const Eigen::Vector3d& position) {
  RigidPose p;
  p.rotation << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  p.translation = position;
  return p;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("latcomp_depth_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("ray cast a full-frame fronto-parallel quad") {
  SyntheticScene scene;
  Quad q;
  q.corner = {-50, -50, 3};
  q.extent = {100, 100, 0};
  scene.quads = {q};
  const auto intr = CameraIntrinsics::centered(40, 30);
  const auto rc = raycast(scene, intr, RigidPose::identity());
  for (double d : rc.depth.values()) CHECK(std::abs(d - 3.0) <= 1e-9);
}

TEST_CASE("empty scene gives background and no depth") {
  SyntheticScene scene;
  const auto rc = raycast(scene, CameraIntrinsics::centered(16, 8), RigidPose::identity());
  CHECK(rc.depth.valid_count() == 0);
  for (size_t i = 0; i < rc.image.pixel_count(); ++i) CHECK(rc.image.pixel(i) == scene.background);
}

TEST_CASE("corridor walls match the analytic plane intersection") {
  const SyntheticScene scene = corridor_scene(1);
  const auto intr = CameraIntrinsics::centered(64, 36);
  const RigidPose pose = forward_camera({0, 0, 0.5});
  const auto rc = raycast(scene, intr, pose);
  // Left image edge looks at the y = +1 wall; z-depth = 1 / |ray.y in world|.
  size_t checked = 0;
  for (int v = 0; v < intr.height; ++v) {
    const Eigen::Vector3d ray = pose.rotation * intr.unproject(0, v);
    const double s = (1.0 - pose.translation.y()) / ray.y();
    const Eigen::Vector3d hit = pose.translation + s * ray;
    if (hit.z() <= 0 || hit.z() >= 2.5 || hit.x() >= 16) continue;
    CHECK(std::abs(rc.depth(0, v) - s) <= 1e-9);
    ++checked;
  }
  CHECK(checked > 0);
  // Depth grows down-row along the ground centerline.
  for (int v = intr.height - 1; v > intr.height / 2 + 1; --v) {
    CHECK(rc.depth(32, v) < rc.depth(32, v - 1));
  }
}

TEST_CASE("plane_depth") {
  const auto intr = CameraIntrinsics::centered(32, 20);
  SUBCASE("level camera over the ground splits at the horizon") {
    const auto d = plane_depth(intr, forward_camera({0, 0, 1.2}), Eigen::Vector3d::UnitZ(), 1.2);
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) CHECK(d.valid(u, v) == (v > intr.cy));
    }
  }
  SUBCASE("fronto-parallel plane") {
    const auto d = plane_depth(intr, RigidPose::identity(), -Eigen::Vector3d::UnitZ(), 2.5);
    for (double z : d.values()) CHECK(z == doctest::Approx(2.5));
  }
  SUBCASE("oblique plane agrees with a ray-cast quad") {
    // Plane x = 3 seen by a camera yawed 30 degrees away from its normal.
    const double yaw = 0.5;
    RigidPose pose = forward_camera({0, 0, 0});
    Eigen::Matrix3d rz;
    rz << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;
    pose.rotation = rz * pose.rotation;
    SyntheticScene scene;
    Quad q;
    q.corner = {3, -100, -100};
    q.extent = {0, 200, 200};
    scene.quads = {q};
    const auto rc = raycast(scene, intr, pose);
    const auto d = plane_depth(intr, pose, -Eigen::Vector3d::UnitX(), 3.0);
    for (size_t i = 0; i < d.pixel_count(); ++i) {
      REQUIRE(d.valid(i) == rc.depth.valid(i));
      if (d.valid(i)) CHECK(std::abs(d.at(i) - rc.depth.at(i)) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(plane_depth(intr, RigidPose::identity(), Eigen::Vector3d::UnitZ(), 0.0), Error);
}

TEST_CASE("synthetic source frame matches a direct ray cast") {
  const auto seq = make_synthetic_sequence(testing::small_options(ScenePreset::kCorridor, 3, 5));
  const DepthSource src = make_synthetic_source(seq);
  for (size_t i = 0; i < 3; ++i) {
    const auto frame = load_frame(src, i);
    const auto rc = raycast(seq.scene, seq.info.intrinsics, seq.info.camera_pose(i));
    CHECK(frame.image == rc.image);
    CHECK(frame.depth == rc.depth);
    CHECK(frame.timestamp == seq.info.timestamps[i]);
  }
  CHECK_THROWS_AS(load_frame(src, 3), Error);
}

TEST_CASE("depth dropout is seeded") {
  auto seq = make_synthetic_sequence(testing::small_options(ScenePreset::kCorridor, 2, 5));
  seq.depth_dropout = 0.45;
  seq.dropout_seed = 9;
  const DepthSource a = make_synthetic_source(seq), b = make_synthetic_source(seq);
  const auto fa = load_frame(a, 1), fb = load_frame(b, 1);
  CHECK(fa.depth == fb.depth);
  const double frac = 1.0 - static_cast<double>(fa.depth.valid_count()) / fa.depth.pixel_count();
  CHECK(frac == doctest::Approx(0.45).epsilon(0.05));
}

TEST_CASE("plane depth source wraps imagery") {
  const auto seq = make_synthetic_sequence(testing::small_options(ScenePreset::kCorridor, 2, 5));
  const DepthSource src = PlaneDepth{Eigen::Vector3d::UnitZ(), 0.5, Synthetic{std::make_shared<SyntheticSequence>(seq)}};
  const auto frame = load_frame(src, 0);
  const auto expect = plane_depth(seq.info.intrinsics, seq.info.camera_pose(0), Eigen::Vector3d::UnitZ(), 0.5);
  CHECK(frame.depth == expect);
  CHECK_THROWS_AS(validate(DepthSource{PlaneDepth{Eigen::Vector3d(0, 0, 2), 0.5,
                                                  Synthetic{std::make_shared<SyntheticSequence>(seq)}}}),
                  Error);
}

TEST_CASE("oracle consistency: reprojected colors match the target ray cast") {
  const SyntheticScene scene = corridor_scene(3);
  const auto intr = CameraIntrinsics::centered(160, 90);
  const RigidPose a = forward_camera({1, 0, 0.5});
  const RigidPose b = compose(a, RigidPose::from_translation({0.08, 0.0, 0.2}));
  const auto src = raycast(scene, intr, a);
  const auto dst = raycast(scene, intr, b);
  const auto pts = project(intr, backproject(intr, src.depth, src.image), a, b);
  double err = 0;
  size_t n = 0;
  for (const auto& p : pts) {
    const long u = std::lround(p.pixel.x()), v = std::lround(p.pixel.y());
    if (u < 1 || v < 1 || u >= intr.width - 1 || v >= intr.height - 1) continue;
    // Skip occluded points and silhouettes (depth jumps around the pixel).
    const double dz = dst.depth(static_cast<int>(u), static_cast<int>(v));
    if (std::abs(dz - p.depth) > 0.02 * dz) continue;
    bool edge = false;
    for (int k = -1; k <= 1; ++k) {
      for (int j = -1; j <= 1; ++j) {
        edge = edge || std::abs(dst.depth(static_cast<int>(u + j), static_cast<int>(v + k)) - dz) > 0.1 * dz;
      }
    }
    if (edge) continue;
    err += (p.color - dst.image.pixel(static_cast<int>(u), static_cast<int>(v))).cwiseAbs().mean();
    ++n;
  }
  REQUIRE(n > 1000);
  CHECK(err / n <= 0.05);
}

TEST_CASE("file depth source reads bundle frames") {
  const auto seq = make_synthetic_sequence(testing::small_options(ScenePreset::kFrontal, 2, 1, 24, 16));
  const DepthSource synth = make_synthetic_source(seq);
  const fs::path dir = scratch_dir("file_source");
  write_bundle(dir, seq.info, [&](size_t i) {
    auto f = load_frame(synth, i);
    return FrameFiles{f.image, f.depth};
  });
  const DepthSource files = make_file_source(dir);
  const auto a = load_frame(files, 1), b = load_frame(synth, 1);
  CHECK(a.image == quantize_8bit(b.image));
  CHECK(a.depth == quantize_float32(b.depth));
  CHECK(a.pose == b.pose);
  fs::remove_all(dir);
}
