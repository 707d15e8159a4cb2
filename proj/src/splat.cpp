#include "latcomp/splat.hpp"

#include "latcomp/error.hpp"
#include "latcomp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latcomp {
namespace {

// Chunking of the input cloud is fixed so the binned order never depends on
// the worker count.
constexpr size_t kChunkSize = 1 << 15;

// Above this exponent range a per-splat weight could underflow float, so the
// blend is normalized per pixel by the nearest contributor instead.
constexpr double kMaxGlobalExponent = 80.0;

struct Splat {
  float u, v, radius_sq;
  float z;
  float weight;  // only used on the global-weight path
  float r, g, b;
};

struct TileGrid {
  int size;
  int cols;
  int rows;
  int count() const { return cols * rows; }
};

struct PixelBox {
  int x0, x1, y0, y1;  // inclusive
};

PixelBox covered_box(const Splat& s, int width, int height) {
  const float radius = std::sqrt(s.radius_sq);
  return {std::max(0, static_cast<int>(std::ceil(s.u - radius))),
          std::min(width - 1, static_cast<int>(std::floor(s.u + radius))),
          std::max(0, static_cast<int>(std::ceil(s.v - radius))),
          std::min(height - 1, static_cast<int>(std::floor(s.v + radius)))};
}

}  // namespace

void SplatConfig::validate() const {
  if (!(radius_constant > 0) || !(gamma > 0) || !(z_near > 0) || !(z_far > z_near)) {
    throw Error(ErrorKind::kInvalidArgument,
                "invalid splat config: R=" + std::to_string(radius_constant) +
                    " gamma=" + std::to_string(gamma) + " z_near=" + std::to_string(z_near) +
                    " z_far=" + std::to_string(z_far));
  }
  if (spheres_per_pixel != 1) {
    throw Error(ErrorKind::kInvalidArgument, "spheres_per_pixel must be 1");
  }
  if (tile_size < 1) throw Error(ErrorKind::kInvalidArgument, "tile_size must be positive");
}

double RenderOutput::hole_fraction() const {
  if (hole_mask.size() == 0) return 0.0;
  return static_cast<double>(hole_mask.count()) / static_cast<double>(hole_mask.size());
}

double sphere_radius(double distance, const CameraIntrinsics& intr, const SplatConfig& cfg) {
  return cfg.radius_constant * distance * intr.width / (2.0 * intr.fx);
}

RenderOutput rasterize(const ColoredPointCloud& cloud, const RigidPose& src_pose,
                       const RigidPose& dst_pose, const CameraIntrinsics& intr,
                       const SplatConfig& cfg) {
  cfg.validate();
  intr.validate();
  const int width = intr.width;
  const int height = intr.height;
  const TileGrid grid{cfg.tile_size, (width + cfg.tile_size - 1) / cfg.tile_size,
                      (height + cfg.tile_size - 1) / cfg.tile_size};
  const int tiles = grid.count();

  const double depth_span = cfg.z_far - cfg.z_near;
  const double inv_scale = 1.0 / (cfg.gamma * depth_span);
  const bool global_weights = 1.0 / cfg.gamma <= kMaxGlobalExponent;

  const RigidPose rel = compose(invert(dst_pose), src_pose);
  const Eigen::Matrix3d rot = rel.rotation;
  const Eigen::Vector3d trans = rel.translation;
  // Projected radius = fx * r / z with r from sphere_radius(|q|).
  const double pixel_radius_per_ratio = cfg.radius_constant * width / 2.0;

  const size_t n = cloud.size();
  const size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<std::vector<Splat>> chunk_splats(chunks);
  std::vector<std::vector<uint32_t>> chunk_counts(chunks, std::vector<uint32_t>(tiles, 0));

  // Project and count tile overlaps.
  parallel_for(chunks, cfg.threads, [&](size_t c) {
    const size_t begin = c * kChunkSize;
    const size_t end = std::min(n, begin + kChunkSize);
    auto& out = chunk_splats[c];
    auto& counts = chunk_counts[c];
    out.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
      const Eigen::Vector3d q = rot * cloud.positions[i] + trans;
      const double z = q.z();
      if (!(z > cfg.z_near) || z > cfg.z_far) continue;
      const double u = intr.fx * q.x() / z + intr.cx;
      const double v = intr.fy * q.y() / z + intr.cy;
      const double radius = pixel_radius_per_ratio * q.norm() / z;
      const Color& col = cloud.colors[i];
      Splat s{static_cast<float>(u), static_cast<float>(v),
              static_cast<float>(radius * radius), static_cast<float>(z),
              global_weights ? static_cast<float>(std::exp(-(z - cfg.z_near) * inv_scale)) : 0.0f,
              col[0], col[1], col[2]};
      const PixelBox box = covered_box(s, width, height);
      if (box.x0 > box.x1 || box.y0 > box.y1) continue;
      for (int ty = box.y0 / grid.size; ty <= box.y1 / grid.size; ++ty) {
        for (int tx = box.x0 / grid.size; tx <= box.x1 / grid.size; ++tx) {
          ++counts[ty * grid.cols + tx];
        }
      }
      out.push_back(s);
    }
  });

  // Tile-major, chunk-ordered offsets: each tile's list ends up sorted by
  // point index.
  std::vector<size_t> offsets(static_cast<size_t>(tiles) * chunks + 1, 0);
  {
    size_t running = 0;
    for (int t = 0; t < tiles; ++t) {
      for (size_t c = 0; c < chunks; ++c) {
        offsets[t * chunks + c] = running;
        running += chunk_counts[c][t];
      }
    }
    offsets.back() = running;
  }
  std::vector<Splat> binned(offsets.back());
  parallel_for(chunks, cfg.threads, [&](size_t c) {
    std::vector<size_t> cursor(tiles);
    for (int t = 0; t < tiles; ++t) cursor[t] = offsets[t * chunks + c];
    for (const Splat& s : chunk_splats[c]) {
      const PixelBox box = covered_box(s, width, height);
      for (int ty = box.y0 / grid.size; ty <= box.y1 / grid.size; ++ty) {
        for (int tx = box.x0 / grid.size; tx <= box.x1 / grid.size; ++tx) {
          binned[cursor[ty * grid.cols + tx]++] = s;
        }
      }
    }
  });
  chunk_splats.clear();

  RenderOutput result{ImageBuffer(width, height), Mask(width, height, false),
                      DepthMap(width, height)};
  float* rgb = result.image.data();

  parallel_for(static_cast<size_t>(tiles), cfg.threads, [&](size_t t) {
    const int tx0 = static_cast<int>(t % grid.cols) * grid.size;
    const int ty0 = static_cast<int>(t / grid.cols) * grid.size;
    const int tw = std::min(grid.size, width - tx0);
    const int th = std::min(grid.size, height - ty0);
    const size_t begin = offsets[t * chunks];
    const size_t end = offsets[(t + 1) * chunks];

    std::vector<double> acc(static_cast<size_t>(tw) * th * 5, 0.0);
    std::vector<float> z_min;
    std::vector<uint32_t> hits(static_cast<size_t>(tw) * th, 0);

    auto for_each_covered = [&](const Splat& s, auto&& visit) {
      const PixelBox box = covered_box(s, width, height);
      const int x0 = std::max(box.x0, tx0), x1 = std::min(box.x1, tx0 + tw - 1);
      const int y0 = std::max(box.y0, ty0), y1 = std::min(box.y1, ty0 + th - 1);
      for (int y = y0; y <= y1; ++y) {
        const float dy = static_cast<float>(y) - s.v;
        for (int x = x0; x <= x1; ++x) {
          const float dx = static_cast<float>(x) - s.u;
          if (dx * dx + dy * dy <= s.radius_sq) visit(static_cast<size_t>(y - ty0) * tw + (x - tx0));
        }
      }
    };

    if (!global_weights) {
      z_min.assign(static_cast<size_t>(tw) * th, std::numeric_limits<float>::infinity());
      for (size_t k = begin; k < end; ++k) {
        const Splat& s = binned[k];
        for_each_covered(s, [&](size_t p) { z_min[p] = std::min(z_min[p], s.z); });
      }
    }
    for (size_t k = begin; k < end; ++k) {
      const Splat& s = binned[k];
      for_each_covered(s, [&](size_t p) {
        const double w = global_weights
                             ? static_cast<double>(s.weight)
                             : std::exp(-(static_cast<double>(s.z) - z_min[p]) * inv_scale);
        double* a = &acc[5 * p];
        a[0] += w;
        a[1] += w * s.r;
        a[2] += w * s.g;
        a[3] += w * s.b;
        a[4] += w * s.z;
        ++hits[p];
      });
    }

    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) {
        const size_t p = static_cast<size_t>(y) * tw + x;
        const size_t out = static_cast<size_t>(ty0 + y) * width + (tx0 + x);
        const double* a = &acc[5 * p];
        if (hits[p] == 0 || !(a[0] > 0)) {
          result.hole_mask.set(out, true);
          rgb[3 * out] = cfg.hole_color[0];
          rgb[3 * out + 1] = cfg.hole_color[1];
          rgb[3 * out + 2] = cfg.hole_color[2];
          continue;
        }
        const double inv = 1.0 / a[0];
        for (int ch = 0; ch < 3; ++ch) {
          rgb[3 * out + ch] = std::clamp(static_cast<float>(a[1 + ch] * inv), 0.0f, 1.0f);
        }
        result.blended_depth.set(out, a[4] * inv);
      }
    }
  });

  return result;
}

RenderOutput render_compensated(const ImageBuffer& image, const DepthMap& depth,
                                const CameraIntrinsics& intr, const RigidPose& src_pose,
                                const RigidPose& dst_pose, const SplatConfig& cfg) {
  return rasterize(backproject(intr, depth, image), src_pose, dst_pose, intr, cfg);
}

}  // namespace latcomp
