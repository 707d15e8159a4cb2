#include "latcomp/error.hpp"
#include "latcomp/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace latcomp {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

CameraPlane homography_plane(const FrameBundle& source, const SequenceInfo& info,
                             const CompensatorConfig& cfg) {
  if (cfg.plane) return world_plane_in_camera(*cfg.plane, source.pose);
  if (info.dominant_plane) return world_plane_in_camera(*info.dominant_plane, source.pose);
  const double height = info.camera_mount.translation.z();
  if (height > 0) return {source.pose.rotation.transpose() * -Eigen::Vector3d::UnitZ(), height};
  return ground_plane_in_camera(source.pose);
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "pointcloud") return Method::kPointCloud;
  if (name == "homography") return Method::kHomography;
  if (name == "cropscale") return Method::kCropScale;
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kPointCloud: return "pointcloud";
    case Method::kHomography: return "homography";
    case Method::kCropScale: return "cropscale";
  }
  return "?";
}

CropScaleParams calibrate_crop_scale(const CameraIntrinsics& intr, const DepthMap& reference) {
  std::vector<double> depths;
  depths.reserve(reference.pixel_count());
  for (double d : reference.values()) {
    if (DepthMap::is_valid_depth(d)) depths.push_back(d);
  }
  CropScaleParams params;
  params.shift_per_radian = -intr.fx;
  if (!depths.empty()) {
    auto mid = depths.begin() + static_cast<std::ptrdiff_t>(depths.size() / 2);
    std::nth_element(depths.begin(), mid, depths.end());
    params.zoom_per_meter = 1.0 / *mid;
  }
  return params;
}

CompensatedFrame compensate(const FrameBundle& source, const RigidPose& dst_pose,
                            const SequenceInfo& info, const CompensatorConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const CameraIntrinsics& intr = info.intrinsics;
  CompensatedFrame out;
  ImageBuffer raw;

  switch (cfg.method) {
    case Method::kPointCloud: {
      RenderOutput render = render_compensated(source.image, source.depth, intr, source.pose,
                                               dst_pose, cfg.splat);
      raw = std::move(render.image);
      out.holes = std::move(render.hole_mask);
      out.depth = std::move(render.blended_depth);
      break;
    }
    case Method::kHomography: {
      const HomographyMatrix h =
          plane_homography(intr, source.pose, dst_pose, homography_plane(source, info, cfg));
      WarpResult warped = warp(source.image, h);
      raw = std::move(warped.image);
      out.holes = Mask(intr.width, intr.height);
      for (size_t i = 0; i < out.holes.size(); ++i) {
        if (warped.valid.at(i)) continue;
        out.holes.set(i, true);
        raw.set_pixel(i, cfg.splat.hole_color);
      }
      break;
    }
    case Method::kCropScale: {
      const CropScaleParams params =
          cfg.crop_scale ? *cfg.crop_scale : calibrate_crop_scale(intr, source.depth);
      raw = crop_and_scale(source.image, intr, camera_displacement(source.pose, dst_pose), params);
      out.holes = Mask(intr.width, intr.height);
      break;
    }
  }
  out.timings.render_ms = elapsed_ms(start);
  out.hole_fraction = out.holes.size() == 0
                          ? 0.0
                          : static_cast<double>(out.holes.count()) / static_cast<double>(out.holes.size());

  const auto inpaint_start = std::chrono::steady_clock::now();
  out.image = fill(raw, out.holes, cfg.inpaint).image;
  out.timings.inpaint_ms = elapsed_ms(inpaint_start);
  out.timings.total_ms = elapsed_ms(start);
  return out;
}

}  // namespace latcomp
