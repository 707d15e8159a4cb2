#pragma once

#include "latcomp/geometry.hpp"
#include "latcomp/image.hpp"
#include "latcomp/sequence.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace testing {

using namespace latcomp;

inline RigidPose random_pose(std::mt19937_64& rng, double max_translation = 2.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-max_translation, max_translation);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return {q.toRotationMatrix(), Eigen::Vector3d(u(rng), u(rng), u(rng))};
}

inline ImageBuffer random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImageBuffer img(w, h);
  for (size_t i = 0; i < img.pixel_count(); ++i) img.set_pixel(i, Color(u(rng), u(rng), u(rng)));
  return img;
}

// Depths in [lo, hi] with roughly `invalid_fraction` of pixels invalid.
inline DepthMap random_depth(std::mt19937_64& rng, int w, int h, double lo = 0.5, double hi = 10.0,
                             double invalid_fraction = 0.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  DepthMap d(w, h);
  for (size_t i = 0; i < d.pixel_count(); ++i) {
    const double value = u(rng);
    if (coin(rng) >= invalid_fraction) d.set(i, value);
  }
  return d;
}

inline double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double m = 0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    m = std::max(m, static_cast<double>(std::abs(a.values()[i] - b.values()[i])));
  }
  return m;
}

inline SyntheticOptions small_options(ScenePreset preset, size_t frames, uint64_t seed = 1,
                                      int w = 160, int h = 90) {
  SyntheticOptions o;
  o.preset = preset;
  o.frames = frames;
  o.seed = seed;
  o.width = w;
  o.height = h;
  return o;
}

}  // namespace testing
