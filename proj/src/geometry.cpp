#include "latcomp/geometry.hpp"

#include "latcomp/error.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace latcomp {

void CameraIntrinsics::validate() const {
  const bool ok = fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width &&
                  cy >= 0 && cy < height && std::isfinite(fx) && std::isfinite(fy);
  if (!ok) {
    throw Error(ErrorKind::kInvalidArgument,
                "invalid intrinsics: fx=" + std::to_string(fx) + " fy=" + std::to_string(fy) +
                    " cx=" + std::to_string(cx) + " cy=" + std::to_string(cy) + " size=" +
                    shape_string(width, height));
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

CameraIntrinsics CameraIntrinsics::centered(int width, int height, double fx_over_width) {
  const double f = fx_over_width * width;
  return {f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

RigidPose RigidPose::from_noisy(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& t) {
  RigidPose pose{rotation, t};
  if (pose.orthonormality_error() > 1e-6) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
      Eigen::Matrix3d u = svd.matrixU();
      u.col(2) *= -1;
      r = u * svd.matrixV().transpose();
    }
    pose.rotation = r;
  }
  return pose;
}

Eigen::Matrix4d RigidPose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double RigidPose::orthonormality_error() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(rotation.determinant() - 1.0));
}

RigidPose compose(const RigidPose& a, const RigidPose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidPose invert(const RigidPose& a) {
  const Eigen::Matrix3d rt = a.rotation.transpose();
  return {rt, -(rt * a.translation)};
}

double pose_distance(const RigidPose& a, const RigidPose& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

ColoredPointCloud backproject(const CameraIntrinsics& intr, const DepthMap& depth,
                              const ImageBuffer& image) {
  if (depth.width() != intr.width || depth.height() != intr.height ||
      image.width() != intr.width || image.height() != intr.height) {
    throw Error(ErrorKind::kDimensionMismatch,
                "backproject: intrinsics " + shape_string(intr.width, intr.height) + ", depth " +
                    shape_string(depth.width(), depth.height()) + ", image " +
                    shape_string(image.width(), image.height()));
  }
  ColoredPointCloud cloud;
  const size_t n = depth.valid_count();
  cloud.positions.reserve(n);
  cloud.colors.reserve(n);
  cloud.source_pixel.reserve(n);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const size_t i = static_cast<size_t>(v) * intr.width + u;
      if (!depth.valid(i)) continue;
      cloud.positions.push_back(intr.unproject(u, v) * depth.at(i));
      cloud.colors.push_back(image.pixel(i));
      cloud.source_pixel.push_back(static_cast<int32_t>(i));
    }
  }
  return cloud;
}

std::vector<ProjectedPoint> project(const CameraIntrinsics& intr, const ColoredPointCloud& cloud,
                                    const RigidPose& src_pose, const RigidPose& dst_pose,
                                    double z_near) {
  const RigidPose rel = compose(invert(dst_pose), src_pose);
  std::vector<ProjectedPoint> out;
  out.reserve(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d q = rel.apply(cloud.positions[i]);
    if (!(q.z() > z_near)) continue;
    const Eigen::Vector2d px(intr.fx * q.x() / q.z() + intr.cx, intr.fy * q.y() / q.z() + intr.cy);
    out.push_back({px, q.z(), cloud.colors[i], cloud.source_pixel[i]});
  }
  return out;
}

}  // namespace latcomp
