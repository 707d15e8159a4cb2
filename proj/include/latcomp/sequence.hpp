#pragma once

#include "latcomp/geometry.hpp"
#include "latcomp/kinematics.hpp"
#include "latcomp/scene.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace latcomp {

// Which frame the stored poses describe.
enum class PoseFrame {
  kCamera,         // camera-to-world
  kBaseWithMount,  // base-to-world; camera pose = pose * camera_mount
};

struct DepthRange {
  double min = 0.2;
  double max = 20.0;
};

// World plane {X : normal . X = offset}.
struct WorldPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
};

struct SequenceInfo {
  std::string name;
  CameraIntrinsics intrinsics;
  double frame_rate = 30.0;
  PoseFrame pose_frame = PoseFrame::kCamera;
  RigidPose camera_mount = RigidPose::identity();
  DepthRange depth_range;
  std::optional<WorldPlane> dominant_plane;
  std::vector<double> timestamps;
  std::vector<RigidPose> poses;  // in `pose_frame` convention
  CommandBuffer commands;

  size_t frame_count() const { return timestamps.size(); }
  RigidPose camera_pose(size_t index) const;
  KinematicParams kinematics() const;
  // Throws kData describing the first broken invariant.
  void validate() const;
};

struct FrameBundle {
  ImageBuffer image;
  DepthMap depth;
  RigidPose pose;  // camera-to-world
  double timestamp = 0.0;
};

enum class ScenePreset { kCorridor, kFrontal };

ScenePreset parse_scene_preset(const std::string& name);
std::string to_string(ScenePreset preset);

struct SyntheticSequence {
  SequenceInfo info;
  SyntheticScene scene;
  // Fraction of depth pixels randomly invalidated, to mimic sensor holes.
  double depth_dropout = 0.0;
  uint64_t dropout_seed = 0;
};

struct SyntheticOptions {
  ScenePreset preset = ScenePreset::kCorridor;
  size_t frames = 90;
  uint64_t seed = 0;
  int width = 640;
  int height = 360;
  double frame_rate = 30.0;
  double speed = 0.5;  // m/s
  double camera_height = 0.5;
};

// Scene plus a scripted drive. One command is issued per frame and the
// stored poses are the exact kinematic integration of those commands.
SyntheticSequence make_synthetic_sequence(const SyntheticOptions& options);

}  // namespace latcomp
