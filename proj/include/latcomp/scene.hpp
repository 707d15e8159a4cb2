#pragma once

#include "latcomp/geometry.hpp"
#include "latcomp/image.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace latcomp {

enum class TextureKind {
  kValueNoise,  // two-octave smooth lattice noise
  kStripes,     // sinusoidal stripes along u, modulated by noise
};

// Axis-aligned rectangle in world coordinates. Exactly one extent component
// is zero (the plane normal axis); the other two are positive.
struct Quad {
  Eigen::Vector3d corner = Eigen::Vector3d::Zero();
  Eigen::Vector3d extent = Eigen::Vector3d::Zero();
  TextureKind texture = TextureKind::kValueNoise;
  uint64_t seed = 0;
  double feature_size = 0.5;  // meters per noise cell / stripe period
  Color base = Color(0.5f, 0.5f, 0.5f);
  Color accent = Color(0.8f, 0.8f, 0.8f);

  int normal_axis() const;
  // In-plane axes in increasing order; texture (u, v) run along them.
  std::pair<int, int> plane_axes() const;
};

struct SyntheticScene {
  std::vector<Quad> quads;
  Color background = Color(0.55f, 0.7f, 0.9f);

  // Throws kInvalidArgument for degenerate quads.
  void validate() const;
};

// Deterministic function of (u, v) in meters and the quad's seed.
Color sample_texture(const Quad& quad, double u, double v);

struct RaycastResult {
  ImageBuffer image;
  DepthMap depth;
};

// Nearest-hit ray cast through every pixel center. Depth is camera z; rays
// that hit nothing get the background color and an invalid depth.
RaycastResult raycast(const SyntheticScene& scene, const CameraIntrinsics& intr,
                      const RigidPose& pose, int threads = 0);

// Depth of the plane lying `offset` meters from the camera center along
// -normal (world frame). Rays parallel to it or hitting it behind the camera
// are invalid.
DepthMap plane_depth(const CameraIntrinsics& intr, const RigidPose& pose,
                     const Eigen::Vector3d& normal, double offset);

// Under-canopy crop-row stand-in: ground, two long side walls, a far wall and
// a canopy ceiling, so every view ray hits geometry. The robot drives along +x
// between y = -1 and y = +1.
SyntheticScene corridor_scene(uint64_t seed);

// One large textured wall facing the robot at x = 4.
SyntheticScene frontal_scene(uint64_t seed);

}  // namespace latcomp
