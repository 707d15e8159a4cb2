#include "latcomp/metrics.hpp"

#include "latcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace latcomp {
namespace {

void require_same_shape(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(what) + ": " + shape_string(w0, h0) + " vs " + shape_string(w1, h1));
  }
}

// Single-channel double plane.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

Plane channel(const ImageBuffer& image, int ch) {
  Plane p{image.width(), image.height(), std::vector<double>(image.pixel_count())};
  const float* d = image.data();
  for (size_t i = 0; i < image.pixel_count(); ++i) p.v[i] = d[3 * i + ch];
  return p;
}

Plane downsample(const Plane& in) {
  Plane out{in.width / 2, in.height / 2, {}};
  out.v.resize(static_cast<size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = 0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                             in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

std::vector<double> gaussian_taps(const SsimParams& p) {
  std::vector<double> taps(p.window);
  const double mid = 0.5 * (p.window - 1);
  double sum = 0;
  for (int i = 0; i < p.window; ++i) {
    taps[i] = std::exp(-((i - mid) * (i - mid)) / (2 * p.sigma * p.sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" filtering.
Plane filter(const Plane& in, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  Plane horiz{in.width - k + 1, in.height, {}};
  horiz.v.resize(static_cast<size_t>(horiz.width) * horiz.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < horiz.width; ++x) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += taps[t] * in.at(x + t, y);
      horiz.at(x, y) = s;
    }
  }
  Plane out{horiz.width, in.height - k + 1, {}};
  out.v.resize(static_cast<size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += taps[t] * horiz.at(x, y + t);
      out.at(x, y) = s;
    }
  }
  return out;
}

struct SsimTerms {
  double ssim;  // mean of l * cs
  double cs;    // mean of cs
};

SsimTerms ssim_terms(const Plane& x, const Plane& y, const SsimParams& p) {
  if (x.width < p.window || x.height < p.window) {
    throw Error(ErrorKind::kInvalidArgument,
                "ssim: image " + shape_string(x.width, x.height) + " smaller than the " +
                    std::to_string(p.window) + "-tap window");
  }
  const auto taps = gaussian_taps(p);
  Plane xx = x, yy = y, xy = x;
  for (size_t i = 0; i < x.v.size(); ++i) {
    xx.v[i] = x.v[i] * x.v[i];
    yy.v[i] = y.v[i] * y.v[i];
    xy.v[i] = x.v[i] * y.v[i];
  }
  const Plane mx = filter(x, taps), my = filter(y, taps);
  const Plane sxx = filter(xx, taps), syy = filter(yy, taps), sxy = filter(xy, taps);
  const double c1 = (p.k1 * 1.0) * (p.k1 * 1.0);
  const double c2 = (p.k2 * 1.0) * (p.k2 * 1.0);
  double ssim_sum = 0, cs_sum = 0;
  for (size_t i = 0; i < mx.v.size(); ++i) {
    const double mux = mx.v[i], muy = my.v[i];
    const double vx = sxx.v[i] - mux * mux;
    const double vy = syy.v[i] - muy * muy;
    const double cov = sxy.v[i] - mux * muy;
    const double cs = (2 * cov + c2) / (vx + vy + c2);
    const double l = (2 * mux * muy + c1) / (mux * mux + muy * muy + c1);
    ssim_sum += l * cs;
    cs_sum += cs;
  }
  const auto n = static_cast<double>(mx.v.size());
  return {ssim_sum / n, cs_sum / n};
}

}  // namespace

double psnr(const ImageBuffer& pred, const ImageBuffer& truth, const std::optional<Mask>& mask) {
  require_same_shape(pred.width(), pred.height(), truth.width(), truth.height(), "psnr");
  if (mask) require_same_shape(mask->width(), mask->height(), pred.width(), pred.height(), "psnr mask");
  const float* a = pred.data();
  const float* b = truth.data();
  double sum = 0;
  size_t count = 0;
  for (size_t i = 0; i < pred.pixel_count(); ++i) {
    if (mask && !mask->at(i)) continue;
    for (int ch = 0; ch < 3; ++ch) {
      const double d = static_cast<double>(a[3 * i + ch]) - static_cast<double>(b[3 * i + ch]);
      sum += d * d;
    }
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::kInvalidArgument, "psnr: mask selects no pixels");
  const double mse = sum / (3.0 * static_cast<double>(count));
  if (mse <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImageBuffer& pred, const ImageBuffer& truth, const SsimParams& params) {
  require_same_shape(pred.width(), pred.height(), truth.width(), truth.height(), "ssim");
  double total = 0;
  for (int ch = 0; ch < 3; ++ch) total += ssim_terms(channel(pred, ch), channel(truth, ch), params).ssim;
  return total / 3.0;
}

double ms_ssim(const ImageBuffer& pred, const ImageBuffer& truth, const SsimParams& params) {
  require_same_shape(pred.width(), pred.height(), truth.width(), truth.height(), "ms_ssim");
  if (std::min(pred.width(), pred.height()) < kMsSsimMinDimension) {
    throw Error(ErrorKind::kInvalidArgument,
                "ms_ssim: image " + shape_string(pred.width(), pred.height()) +
                    " too small; five scales need a minimum dimension of " +
                    std::to_string(kMsSsimMinDimension) + " px");
  }
  double total = 0;
  for (int ch = 0; ch < 3; ++ch) {
    Plane x = channel(pred, ch), y = channel(truth, ch);
    double value = 1.0;
    for (size_t s = 0; s < kMsSsimWeights.size(); ++s) {
      const SsimTerms t = ssim_terms(x, y, params);
      const bool last = s + 1 == kMsSsimWeights.size();
      value *= std::pow(std::max(0.0, last ? t.ssim : t.cs), kMsSsimWeights[s]);
      if (!last) {
        x = downsample(x);
        y = downsample(y);
      }
    }
    total += value;
  }
  return total / 3.0;
}

DepthAccuracy depth_metrics(const DepthMap& pred, const DepthMap& truth) {
  require_same_shape(pred.width(), pred.height(), truth.width(), truth.height(), "depth_metrics");
  double rel_sum = 0;
  size_t inliers = 0, count = 0;
  for (size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!pred.valid(i) || !truth.valid(i)) continue;
    const double p = pred.at(i), t = truth.at(i);
    rel_sum += std::abs(p - t) / t;
    if (std::max(p / t, t / p) < 1.25) ++inliers;
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::kInvalidArgument, "depth_metrics: no jointly valid pixels");
  const auto n = static_cast<double>(count);
  return {rel_sum / n, static_cast<double>(inliers) / n, count};
}

double si_loss(const DepthMap& pred, const DepthMap& truth, double lambda) {
  require_same_shape(pred.width(), pred.height(), truth.width(), truth.height(), "si_loss");
  for (const DepthMap* m : {&pred, &truth}) {
    for (double d : m->values()) {
      if (std::isfinite(d) && !(d > 0)) {
        throw Error(ErrorKind::kInvalidArgument, "si_loss: non-positive depth");
      }
    }
  }
  std::vector<double> g;
  g.reserve(pred.pixel_count());
  for (size_t i = 0; i < pred.pixel_count(); ++i) {
    if (pred.valid(i) && truth.valid(i)) g.push_back(std::log(truth.at(i) / pred.at(i)));
  }
  if (g.empty()) throw Error(ErrorKind::kInvalidArgument, "si_loss: no jointly valid pixels");
  // Shifted by the first sample so identical values cancel exactly:
  // mean(g^2) - lambda mean(g)^2 = var(g) + (1 - lambda) mean(g)^2.
  const auto n = static_cast<double>(g.size());
  double shift_sum = 0;
  for (double v : g) shift_sum += v - g[0];
  const double mean = g[0] + shift_sum / n;
  double var = 0;
  for (double v : g) var += (v - mean) * (v - mean);
  var /= n;
  const double value = var + (1.0 - lambda) * mean * mean;
  return value > 0 ? std::sqrt(value) : 0.0;
}

}  // namespace latcomp
