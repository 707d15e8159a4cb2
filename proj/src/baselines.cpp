#include "latcomp/baselines.hpp"

#include "latcomp/error.hpp"

#include <algorithm>
#include <cmath>

namespace latcomp {

HomographyMatrix HomographyMatrix::normalized(const Eigen::Matrix3d& m) {
  HomographyMatrix out{m};
  if (m(2, 2) != 0.0) out.h /= m(2, 2);
  if (!(std::abs(out.h.determinant()) > 1e-12)) {
    throw Error(ErrorKind::kInvalidArgument, "homography is singular");
  }
  return out;
}

HomographyMatrix HomographyMatrix::inverse() const { return normalized(h.inverse()); }

Eigen::Vector2d HomographyMatrix::map(const Eigen::Vector2d& pixel) const {
  const Eigen::Vector3d p = h * pixel.homogeneous();
  return p.hnormalized();
}

CameraPlane world_plane_in_camera(const WorldPlane& plane, const RigidPose& camera_pose) {
  CameraPlane out{camera_pose.rotation.transpose() * plane.normal,
                  plane.offset - plane.normal.dot(camera_pose.translation)};
  if (out.distance < 0) {
    out.normal = -out.normal;
    out.distance = -out.distance;
  }
  return out;
}

CameraPlane ground_plane_in_camera(const RigidPose& camera_pose) {
  return world_plane_in_camera(WorldPlane{Eigen::Vector3d::UnitZ(), 0.0}, camera_pose);
}

HomographyMatrix plane_homography(const CameraIntrinsics& intr, const RigidPose& src_pose,
                                  const RigidPose& dst_pose, const CameraPlane& plane) {
  if (!(plane.distance > 0)) {
    throw Error(ErrorKind::kInvalidArgument, "plane_homography: plane distance must be positive");
  }
  const RigidPose rel = compose(invert(dst_pose), src_pose);
  const Eigen::Vector3d dst_center_in_src = invert(rel).translation;
  if (std::abs(plane.normal.dot(dst_center_in_src) - plane.distance) < 1e-9) {
    throw Error(ErrorKind::kInvalidArgument,
                "plane_homography: destination camera lies on the plane");
  }
  const Eigen::Matrix3d k = intr.matrix();
  const Eigen::Matrix3d euclidean =
      rel.rotation + rel.translation * plane.normal.transpose() / plane.distance;
  return HomographyMatrix::normalized(k * euclidean * k.inverse());
}

Color sample_bilinear(const ImageBuffer& image, double x, double y) {
  const int w = image.width(), h = image.height();
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, std::max(0, w - 2));
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, std::max(0, h - 2));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  const Eigen::Vector3d c00 = image.pixel(x0, y0).cast<double>();
  const Eigen::Vector3d c10 = image.pixel(x1, y0).cast<double>();
  const Eigen::Vector3d c01 = image.pixel(x0, y1).cast<double>();
  const Eigen::Vector3d c11 = image.pixel(x1, y1).cast<double>();
  const Eigen::Vector3d c = (1 - fx) * (1 - fy) * c00 + fx * (1 - fy) * c10 +
                            (1 - fx) * fy * c01 + fx * fy * c11;
  return c.cast<float>();
}

WarpResult warp(const ImageBuffer& image, const HomographyMatrix& homography) {
  const int w = image.width(), h = image.height();
  const HomographyMatrix back = homography.inverse();
  WarpResult out{ImageBuffer(w, h), Mask(w, h, false)};
  constexpr double kEdge = 1e-9;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d p = back.h * Eigen::Vector3d(x, y, 1.0);
      if (!(p.z() > 0)) continue;
      const double sx = p.x() / p.z(), sy = p.y() / p.z();
      if (sx < -kEdge || sy < -kEdge || sx > w - 1 + kEdge || sy > h - 1 + kEdge) continue;
      out.image.set_pixel(x, y, sample_bilinear(image, std::clamp(sx, 0.0, w - 1.0),
                                                std::clamp(sy, 0.0, h - 1.0)));
      out.valid.set(x, y, true);
    }
  }
  return out;
}

void CropScaleParams::validate() const {
  if (!(zoom_per_meter >= 0) || !std::isfinite(shift_per_radian)) {
    throw Error(ErrorKind::kInvalidArgument, "crop-scale needs zoom_per_meter >= 0");
  }
}

PlanarDisplacement camera_displacement(const RigidPose& src_pose, const RigidPose& dst_pose) {
  const RigidPose rel = compose(invert(src_pose), dst_pose);
  const Eigen::Vector3d axis = rel.rotation.col(2);
  return {rel.translation.z(), std::atan2(-axis.x(), axis.z())};
}

CropWindow crop_window(const CameraIntrinsics& intr, const PlanarDisplacement& motion,
                       const CropScaleParams& params) {
  params.validate();
  if (!std::isfinite(motion.forward) || !std::isfinite(motion.heading)) {
    throw Error(ErrorKind::kInvalidArgument, "crop-scale displacement must be finite");
  }
  const double scale = std::clamp(1.0 - params.zoom_per_meter * motion.forward, 0.2, 1.0);
  const double half_w = 0.5 * scale * (intr.width - 1);
  const double half_h = 0.5 * scale * (intr.height - 1);
  const double cx = std::clamp(intr.cx + params.shift_per_radian * motion.heading, half_w,
                               (intr.width - 1) - half_w);
  const double cy = std::clamp(intr.cy, half_h, (intr.height - 1) - half_h);
  return {cx, cy, scale};
}

ImageBuffer crop_and_scale(const ImageBuffer& image, const CameraIntrinsics& intr,
                           const PlanarDisplacement& motion, const CropScaleParams& params) {
  const CropWindow win = crop_window(intr, motion, params);
  const int w = image.width(), h = image.height();
  const double mid_x = 0.5 * (w - 1), mid_y = 0.5 * (h - 1);
  ImageBuffer out(w, h);
  for (int y = 0; y < h; ++y) {
    const double sy = std::clamp(win.center_y + (y - mid_y) * win.scale, 0.0, h - 1.0);
    for (int x = 0; x < w; ++x) {
      const double sx = std::clamp(win.center_x + (x - mid_x) * win.scale, 0.0, w - 1.0);
      out.set_pixel(x, y, sample_bilinear(image, sx, sy));
    }
  }
  return out;
}

}  // namespace latcomp
