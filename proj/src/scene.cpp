#include "latcomp/scene.hpp"

#include "latcomp/error.hpp"
#include "latcomp/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace latcomp {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double lattice_value(int64_t ix, int64_t iy, uint64_t seed) {
  uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<uint64_t>(ix));
  h = splitmix64(h ^ static_cast<uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double quintic(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

// Smooth value noise in [0, 1] with unit lattice spacing.
double value_noise(double x, double y, uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
  const double sx = quintic(x - fx), sy = quintic(y - fy);
  const double a = lattice_value(ix, iy, seed), b = lattice_value(ix + 1, iy, seed);
  const double c = lattice_value(ix, iy + 1, seed), d = lattice_value(ix + 1, iy + 1, seed);
  const double top = a + (b - a) * sx;
  const double bottom = c + (d - c) * sx;
  return top + (bottom - top) * sy;
}

}  // namespace

int Quad::normal_axis() const {
  for (int a = 0; a < 3; ++a) {
    if (extent[a] == 0.0) return a;
  }
  return -1;
}

std::pair<int, int> Quad::plane_axes() const {
  const int n = normal_axis();
  return {n == 0 ? 1 : 0, n == 2 ? 1 : 2};
}

void SyntheticScene::validate() const {
  for (size_t i = 0; i < quads.size(); ++i) {
    const Quad& q = quads[i];
    int zeros = 0;
    bool ok = q.corner.allFinite() && q.extent.allFinite() && q.feature_size > 0;
    for (int a = 0; a < 3; ++a) {
      if (q.extent[a] == 0.0) ++zeros;
      else if (!(q.extent[a] > 0)) ok = false;
    }
    if (!ok || zeros != 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "quad " + std::to_string(i) + " needs one zero and two positive extents");
    }
  }
}

Color sample_texture(const Quad& quad, double u, double v) {
  const double s = 1.0 / quad.feature_size;
  double t = 0.0;
  switch (quad.texture) {
    case TextureKind::kValueNoise:
      t = 0.65 * value_noise(u * s, v * s, quad.seed) +
          0.35 * value_noise(2.0 * u * s, 2.0 * v * s, quad.seed ^ 0x5bd1e995ULL);
      break;
    case TextureKind::kStripes: {
      const double stripe = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * u * s);
      t = 0.7 * stripe + 0.3 * value_noise(u * s, 0.5 * v * s, quad.seed);
      break;
    }
  }
  const Color mixed = quad.base + static_cast<float>(t) * (quad.accent - quad.base);
  return mixed.cwiseMax(0.0f).cwiseMin(1.0f);
}

RaycastResult raycast(const SyntheticScene& scene, const CameraIntrinsics& intr,
                      const RigidPose& pose, int threads) {
  intr.validate();
  scene.validate();
  RaycastResult out{ImageBuffer(intr.width, intr.height, scene.background),
                    DepthMap(intr.width, intr.height)};
  const Eigen::Vector3d origin = pose.translation;

  parallel_for(static_cast<size_t>(intr.height), threads, [&](size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < intr.width; ++u) {
      const Eigen::Vector3d dir = pose.rotation * intr.unproject(u, v);
      double best = std::numeric_limits<double>::infinity();
      const Quad* hit_quad = nullptr;
      double hit_u = 0, hit_v = 0;
      for (const Quad& q : scene.quads) {
        const int n = q.normal_axis();
        if (dir[n] == 0.0) continue;
        const double t = (q.corner[n] - origin[n]) / dir[n];
        if (!(t > 0) || !(t < best)) continue;
        const auto [a, b] = q.plane_axes();
        const double pa = origin[a] + t * dir[a] - q.corner[a];
        const double pb = origin[b] + t * dir[b] - q.corner[b];
        if (pa < 0 || pa > q.extent[a] || pb < 0 || pb > q.extent[b]) continue;
        best = t;
        hit_quad = &q;
        hit_u = pa;
        hit_v = pb;
      }
      if (hit_quad == nullptr) continue;
      out.depth.set(u, v, best);
      out.image.set_pixel(u, v, sample_texture(*hit_quad, hit_u, hit_v));
    }
  });
  return out;
}

DepthMap plane_depth(const CameraIntrinsics& intr, const RigidPose& pose,
                     const Eigen::Vector3d& normal, double offset) {
  intr.validate();
  if (!(offset > 0) || std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument,
                "plane_depth needs a unit normal and positive offset (camera on the plane?)");
  }
  DepthMap depth(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const double denom = normal.dot(pose.rotation * intr.unproject(u, v));
      if (!(denom < -1e-12)) continue;
      depth.set(u, v, -offset / denom);
    }
  }
  return depth;
}

SyntheticScene corridor_scene(uint64_t seed) {
  SyntheticScene scene;
  const double x0 = -2.0, length = 18.0, half_width = 1.0, wall_height = 2.5;
  Quad ground;
  ground.corner = {x0, -half_width, 0.0};
  ground.extent = {length, 2 * half_width, 0.0};
  ground.texture = TextureKind::kValueNoise;
  ground.seed = splitmix64(seed ^ 1);
  ground.feature_size = 0.6;
  ground.base = Color(0.35f, 0.25f, 0.15f);
  ground.accent = Color(0.6f, 0.48f, 0.32f);

  Quad left;
  left.corner = {x0, half_width, 0.0};
  left.extent = {length, 0.0, wall_height};
  left.texture = TextureKind::kStripes;
  left.seed = splitmix64(seed ^ 2);
  left.feature_size = 0.8;
  left.base = Color(0.15f, 0.4f, 0.12f);
  left.accent = Color(0.45f, 0.7f, 0.3f);

  Quad right = left;
  right.corner = {x0, -half_width, 0.0};
  right.seed = splitmix64(seed ^ 3);
  right.base = Color(0.2f, 0.38f, 0.1f);
  right.accent = Color(0.5f, 0.75f, 0.35f);

  Quad far_wall;
  far_wall.corner = {x0 + length, -half_width, 0.0};
  far_wall.extent = {0.0, 2 * half_width, wall_height};
  far_wall.texture = TextureKind::kValueNoise;
  far_wall.seed = splitmix64(seed ^ 4);
  far_wall.feature_size = 0.5;
  far_wall.base = Color(0.3f, 0.45f, 0.25f);
  far_wall.accent = Color(0.55f, 0.65f, 0.4f);

  // Untextured lid in the sky color: looks like open sky but gives the rays
  // above the walls a depth.
  Quad ceiling = ground;
  ceiling.corner = {x0, -half_width, wall_height};
  ceiling.seed = splitmix64(seed ^ 5);
  ceiling.base = scene.background;
  ceiling.accent = scene.background;

  scene.quads = {ground, left, right, far_wall, ceiling};
  return scene;
}

SyntheticScene frontal_scene(uint64_t seed) {
  SyntheticScene scene;
  Quad wall;
  wall.corner = {4.0, -8.0, -5.0};
  wall.extent = {0.0, 16.0, 11.0};
  wall.texture = TextureKind::kValueNoise;
  wall.seed = splitmix64(seed ^ 5);
  wall.feature_size = 0.7;
  wall.base = Color(0.25f, 0.35f, 0.2f);
  wall.accent = Color(0.75f, 0.7f, 0.45f);
  scene.quads = {wall};
  return scene;
}

}  // namespace latcomp
