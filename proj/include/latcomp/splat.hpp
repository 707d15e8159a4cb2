#pragma once

#include "latcomp/geometry.hpp"
#include "latcomp/image.hpp"

namespace latcomp {

struct SplatConfig {
  double radius_constant = 3e-3;            // R
  double gamma = 0.1;                       // blending temperature
  Color hole_color = Color(0.0f, 1.0f, 0.0f);
  double z_near = kDefaultZNear;
  double z_far = 20.0;
  int spheres_per_pixel = 1;
  int tile_size = 64;
  int threads = 0;  // 0: all hardware threads

  void validate() const;
};

struct RenderOutput {
  ImageBuffer image;
  Mask hole_mask;          // true where no sphere covered the pixel
  DepthMap blended_depth;  // softmax-weighted depth, invalid at holes

  double hole_fraction() const;
};

// World-space radius of a sphere `distance` meters from the camera. The
// sensor-width / focal-length ratio is taken as width / fx, so the projected
// radius is R * width / 2 pixels at every distance along a given ray.
double sphere_radius(double distance, const CameraIntrinsics& intr, const SplatConfig& cfg);

// Splats `cloud` (in src_pose's camera frame) into dst_pose's view as disks.
// Each pixel blends its covering spheres with weights
//   w_i = exp(-(z_i - z_near) / (gamma * (z_far - z_near)))
// in point-index order, so the output is independent of the thread count.
RenderOutput rasterize(const ColoredPointCloud& cloud, const RigidPose& src_pose,
                       const RigidPose& dst_pose, const CameraIntrinsics& intr,
                       const SplatConfig& cfg);

// backproject followed by rasterize.
RenderOutput render_compensated(const ImageBuffer& image, const DepthMap& depth,
                                const CameraIntrinsics& intr, const RigidPose& src_pose,
                                const RigidPose& dst_pose, const SplatConfig& cfg);

}  // namespace latcomp
