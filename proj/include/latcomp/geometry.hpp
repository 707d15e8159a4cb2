#pragma once

#include "latcomp/image.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace latcomp {

// Pinhole camera. Pixel (u, v) denotes the center of column u, row v; the
// camera frame is x right, y down, z forward.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws kInvalidArgument when any invariant is violated.
  void validate() const;

  Eigen::Matrix3d matrix() const;

  // K^-1 (u, v, 1): the ray through a pixel with unit z.
  Eigen::Vector3d unproject(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }

  // Square-pixel camera with the principal point at the image center and a
  // horizontal field of view set by `fx_over_width`.
  static CameraIntrinsics centered(int width, int height, double fx_over_width = 0.5);

  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid transform mapping points from a camera frame into the world frame.
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidPose identity() { return {}; }
  static RigidPose from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  // Builds a pose from a possibly noisy rotation. Rotations whose
  // orthonormality error exceeds 1e-6 are projected back onto SO(3).
  static RigidPose from_noisy(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& t);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Eigen::Matrix4d matrix() const;

  // Largest of |R^T R - I| and |det R - 1|.
  double orthonormality_error() const;

  bool operator==(const RigidPose&) const = default;
};

// a * b: apply b first, then a.
RigidPose compose(const RigidPose& a, const RigidPose& b);
RigidPose invert(const RigidPose& a);

// Largest absolute entry of the 4x4 difference between two poses.
double pose_distance(const RigidPose& a, const RigidPose& b);

struct ColoredPointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Color> colors;
  std::vector<int32_t> source_pixel;  // row-major index into the source raster

  size_t size() const { return positions.size(); }
};

struct ProjectedPoint {
  Eigen::Vector2d pixel;  // continuous, not rounded
  double depth;           // z in the destination camera frame
  Color color;
  int32_t source_pixel;
};

inline constexpr double kDefaultZNear = 0.05;

// Lifts every valid depth pixel to K^-1 (u, v, 1) d in the camera frame.
ColoredPointCloud backproject(const CameraIntrinsics& intr, const DepthMap& depth,
                              const ImageBuffer& image);

// Moves `cloud` (expressed in src's camera frame) into dst's camera frame,
// projects through K and divides by the new depth. Points with depth <= z_near
// are dropped.
std::vector<ProjectedPoint> project(const CameraIntrinsics& intr, const ColoredPointCloud& cloud,
                                    const RigidPose& src_pose, const RigidPose& dst_pose,
                                    double z_near = kDefaultZNear);

}  // namespace latcomp
