#pragma once

#include "latcomp/geometry.hpp"
#include "latcomp/image.hpp"
#include "latcomp/sequence.hpp"

namespace latcomp {

// 3x3 homography normalized so that h33 = 1 whenever h33 != 0.
struct HomographyMatrix {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();

  static HomographyMatrix normalized(const Eigen::Matrix3d& m);
  HomographyMatrix inverse() const;
  Eigen::Vector2d map(const Eigen::Vector2d& pixel) const;
};

// Plane {X : normal . X = distance} in a camera frame, normal pointing away
// from the camera.
struct CameraPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double distance = 1.0;
};

CameraPlane world_plane_in_camera(const WorldPlane& plane, const RigidPose& camera_pose);

// Ground (z = 0 world) as seen from `camera_pose`.
CameraPlane ground_plane_in_camera(const RigidPose& camera_pose);

// Plane-induced homography K (R + t n^T / d) K^-1 from src pixels to dst
// pixels, where (R, t) maps src camera coordinates into dst's. Throws
// kInvalidArgument when d <= 0 or dst's center lies on the plane.
HomographyMatrix plane_homography(const CameraIntrinsics& intr, const RigidPose& src_pose,
                                  const RigidPose& dst_pose, const CameraPlane& plane);

struct WarpResult {
  ImageBuffer image;
  Mask valid;  // false where the source sample fell outside the image
};

// Inverse warp with bilinear sampling. Invalid pixels are black.
WarpResult warp(const ImageBuffer& image, const HomographyMatrix& homography);

struct CropScaleParams {
  double zoom_per_meter = 0.0;    // window shrink per meter of forward motion
  double shift_per_radian = 0.0;  // window center shift (px) per radian of heading

  void validate() const;
};

struct PlanarDisplacement {
  double forward = 0.0;  // meters along the source optical axis
  double heading = 0.0;  // radians, positive = turn left
};

// Forward motion and yaw of dst relative to src, in src's camera frame.
PlanarDisplacement camera_displacement(const RigidPose& src_pose, const RigidPose& dst_pose);

struct CropWindow {
  double center_x, center_y;
  double scale;  // window size / frame size, in [0.2, 1]
};

CropWindow crop_window(const CameraIntrinsics& intr, const PlanarDisplacement& motion,
                       const CropScaleParams& params);

// Crops the window predicted from `motion` and upsamples it to full size.
ImageBuffer crop_and_scale(const ImageBuffer& image, const CameraIntrinsics& intr,
                           const PlanarDisplacement& motion, const CropScaleParams& params);

// Bilinear sample at continuous pixel coordinates; requires the point to lie
// inside [0, w-1] x [0, h-1].
Color sample_bilinear(const ImageBuffer& image, double x, double y);

}  // namespace latcomp
