#pragma once

#include "latcomp/image.hpp"

#include <array>
#include <cstddef>
#include <optional>

namespace latcomp {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kDefaultSiLambda = 0.85;

// 10 log10(1 / MSE) over the masked pixels (all pixels when no mask), the
// three channels averaged into one MSE. Capped at kPsnrCap.
double psnr(const ImageBuffer& pred, const ImageBuffer& truth,
            const std::optional<Mask>& mask = std::nullopt);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
// 11-tap window after four 2x downsamples.
inline constexpr int kMsSsimMinDimension = 176;

// Single-scale SSIM, channel-averaged, Gaussian window, valid region only.
double ssim(const ImageBuffer& pred, const ImageBuffer& truth, const SsimParams& params = {});

// Five-scale MS-SSIM with 2x2 average-pool downsampling. Negative per-scale
// terms are clamped to zero before exponentiation.
double ms_ssim(const ImageBuffer& pred, const ImageBuffer& truth, const SsimParams& params = {});

struct DepthAccuracy {
  double abs_rel = 0.0;
  double delta1 = 0.0;
  size_t valid_pixels = 0;
};

// Over pixels valid in both maps.
DepthAccuracy depth_metrics(const DepthMap& pred, const DepthMap& truth);

// Root scale-invariant log error over jointly valid pixels,
//   sqrt(mean(g^2) - lambda * mean(g)^2),  g = log(truth / pred).
double si_loss(const DepthMap& pred, const DepthMap& truth, double lambda = kDefaultSiLambda);

struct MetricReport {
  double psnr = 0.0;
  double ms_ssim = 0.0;
  double abs_rel = 0.0;
  double delta1 = 0.0;
  double si_loss = 0.0;
  size_t valid_pixel_count = 0;
};

}  // namespace latcomp
