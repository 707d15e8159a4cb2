#include "latcomp/sequence.hpp"

#include "latcomp/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace latcomp {

RigidPose SequenceInfo::camera_pose(size_t index) const {
  const RigidPose& p = poses.at(index);
  return pose_frame == PoseFrame::kCamera ? p : compose(p, camera_mount);
}

KinematicParams SequenceInfo::kinematics() const {
  KinematicParams params;
  params.camera_mount = camera_mount;
  return params;
}

void SequenceInfo::validate() const {
  try {
    intrinsics.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kData, "sequence '" + name + "': " + e.what());
  }
  if (!(frame_rate > 0)) throw Error(ErrorKind::kData, "sequence '" + name + "': frame_rate <= 0");
  if (!(depth_range.min < depth_range.max)) {
    throw Error(ErrorKind::kData, "sequence '" + name + "': depth_range min >= max");
  }
  if (poses.size() != timestamps.size()) {
    throw Error(ErrorKind::kData, "sequence '" + name + "': " + std::to_string(poses.size()) +
                                      " poses for " + std::to_string(timestamps.size()) +
                                      " frames");
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw Error(ErrorKind::kData,
                  "sequence '" + name + "': timestamps not increasing at frame " + std::to_string(i));
    }
  }
}

ScenePreset parse_scene_preset(const std::string& name) {
  if (name == "corridor") return ScenePreset::kCorridor;
  if (name == "frontal") return ScenePreset::kFrontal;
  throw Error(ErrorKind::kInvalidArgument, "unknown scene preset '" + name + "'");
}

std::string to_string(ScenePreset preset) {
  return preset == ScenePreset::kCorridor ? "corridor" : "frontal";
}

SyntheticSequence make_synthetic_sequence(const SyntheticOptions& options) {
  if (options.frames == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one frame");
  if (!(options.frame_rate > 0) || !(options.speed >= 0) || !(options.camera_height > 0)) {
    throw Error(ErrorKind::kInvalidArgument, "frame_rate and camera_height must be > 0, speed >= 0");
  }
  SyntheticSequence seq;
  SequenceInfo& info = seq.info;
  info.name = to_string(options.preset) + "-" + std::to_string(options.seed);
  info.intrinsics = CameraIntrinsics::centered(options.width, options.height);
  info.frame_rate = options.frame_rate;
  info.pose_frame = PoseFrame::kCamera;
  info.camera_mount = forward_camera_mount(options.camera_height);

  // The scripted drive must stay clear of the end wall.
  const double travel = options.speed * static_cast<double>(options.frames) / options.frame_rate;
  const double max_travel = options.preset == ScenePreset::kCorridor ? 14.0 : 3.0;
  if (!(travel <= max_travel)) {
    throw Error(ErrorKind::kInvalidArgument,
                "drive of " + std::to_string(travel) + " m exceeds the " + to_string(options.preset) +
                    " scene's " + std::to_string(max_travel) + " m; use fewer frames");
  }

  if (options.preset == ScenePreset::kCorridor) {
    seq.scene = corridor_scene(options.seed);
    info.dominant_plane = WorldPlane{Eigen::Vector3d::UnitZ(), 0.0};
  } else {
    seq.scene = frontal_scene(options.seed);
    info.dominant_plane = WorldPlane{Eigen::Vector3d::UnitX(), 4.0};
  }

  // Gentle weave whose amplitude and phase depend on the seed.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double amplitude = 0.2 + 0.2 * unit(rng);
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  const double period = 4.0;

  const KinematicParams params = info.kinematics();
  const double dt = 1.0 / options.frame_rate;
  PlanarPose pose;
  std::vector<VelocityCommand> commands;
  for (size_t i = 0; i < options.frames; ++i) {
    const double t = static_cast<double>(i) * dt;
    info.timestamps.push_back(t);
    info.poses.push_back(planar_to_camera(pose, params));
    const VelocityCommand cmd{
        t, options.speed,
        amplitude * std::sin(2.0 * std::numbers::pi * t / period + phase)};
    commands.push_back(cmd);
    pose = step(pose, cmd, dt, params);
  }
  info.commands = CommandBuffer(std::move(commands));
  return seq;
}

}  // namespace latcomp
