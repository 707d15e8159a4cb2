#include "latcomp/inpaint.hpp"

#include "latcomp/error.hpp"

#include <algorithm>
#include <cmath>

namespace latcomp {
namespace {

struct Level {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;     // 3 per pixel, weight-normalized
  std::vector<float> weight;  // coverage in [0, 1]
};

Level pull(const Level& fine) {
  Level coarse;
  coarse.width = (fine.width + 1) / 2;
  coarse.height = (fine.height + 1) / 2;
  const size_t n = static_cast<size_t>(coarse.width) * coarse.height;
  coarse.rgb.assign(3 * n, 0.0f);
  coarse.weight.assign(n, 0.0f);
  for (int y = 0; y < coarse.height; ++y) {
    for (int x = 0; x < coarse.width; ++x) {
      float w_sum = 0.0f;
      float c[3] = {0.0f, 0.0f, 0.0f};
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int fx = 2 * x + dx, fy = 2 * y + dy;
          if (fx >= fine.width || fy >= fine.height) continue;
          const size_t i = static_cast<size_t>(fy) * fine.width + fx;
          const float w = fine.weight[i];
          w_sum += w;
          for (int ch = 0; ch < 3; ++ch) c[ch] += w * fine.rgb[3 * i + ch];
        }
      }
      const size_t o = static_cast<size_t>(y) * coarse.width + x;
      if (w_sum > 0.0f) {
        for (int ch = 0; ch < 3; ++ch) coarse.rgb[3 * o + ch] = c[ch] / w_sum;
      }
      coarse.weight[o] = std::min(1.0f, w_sum);
    }
  }
  return coarse;
}

// Fills partially covered pixels of `fine` from the fully covered `coarse`.
void push(Level& fine, const Level& coarse) {
  for (int y = 0; y < fine.height; ++y) {
    const double cy = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, coarse.height - 1.0);
    const int y0 = static_cast<int>(cy);
    const int y1 = std::min(y0 + 1, coarse.height - 1);
    const float ty = static_cast<float>(cy - y0);
    for (int x = 0; x < fine.width; ++x) {
      const size_t i = static_cast<size_t>(y) * fine.width + x;
      const float w = fine.weight[i];
      if (w >= 1.0f) continue;
      const double cx = std::clamp((x + 0.5) / 2.0 - 0.5, 0.0, coarse.width - 1.0);
      const int x0 = static_cast<int>(cx);
      const int x1 = std::min(x0 + 1, coarse.width - 1);
      const float tx = static_cast<float>(cx - x0);
      for (int ch = 0; ch < 3; ++ch) {
        auto at = [&](int xx, int yy) {
          return coarse.rgb[3 * (static_cast<size_t>(yy) * coarse.width + xx) + ch];
        };
        const float top = at(x0, y0) + tx * (at(x1, y0) - at(x0, y0));
        const float bottom = at(x0, y1) + tx * (at(x1, y1) - at(x0, y1));
        const float interp = top + ty * (bottom - top);
        fine.rgb[3 * i + ch] = w * fine.rgb[3 * i + ch] + (1.0f - w) * interp;
      }
      fine.weight[i] = 1.0f;
    }
  }
}

std::vector<float> pull_push(const ImageBuffer& image, const Mask& holes) {
  std::vector<Level> pyramid(1);
  Level& base = pyramid[0];
  base.width = image.width();
  base.height = image.height();
  base.rgb.assign(image.data(), image.data() + 3 * image.pixel_count());
  base.weight.resize(image.pixel_count());
  for (size_t i = 0; i < image.pixel_count(); ++i) {
    base.weight[i] = holes.at(i) ? 0.0f : 1.0f;
    if (holes.at(i)) base.rgb[3 * i] = base.rgb[3 * i + 1] = base.rgb[3 * i + 2] = 0.0f;
  }
  while (pyramid.back().width > 1 || pyramid.back().height > 1) {
    pyramid.push_back(pull(pyramid.back()));
  }
  for (size_t l = pyramid.size() - 1; l-- > 0;) push(pyramid[l], pyramid[l + 1]);
  return std::move(pyramid[0].rgb);
}

std::vector<float> diffuse(const ImageBuffer& image, const Mask& holes, int iterations) {
  const int w = image.width(), h = image.height();
  std::vector<float> cur(image.data(), image.data() + 3 * image.pixel_count());
  std::vector<uint8_t> known(image.pixel_count());
  std::vector<size_t> hole_pixels;
  for (size_t i = 0; i < image.pixel_count(); ++i) {
    known[i] = holes.at(i) ? 0 : 1;
    if (holes.at(i)) hole_pixels.push_back(i);
  }
  std::vector<float> next = cur;
  std::vector<uint8_t> next_known = known;
  for (int it = 0; it < iterations; ++it) {
    float max_change = 0.0f;
    bool all_known = true;
    for (size_t i : hole_pixels) {
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      float sum[3] = {0.0f, 0.0f, 0.0f};
      int count = 0;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        const size_t j = static_cast<size_t>(ny) * w + nx;
        if (!known[j]) return;
        for (int ch = 0; ch < 3; ++ch) sum[ch] += cur[3 * j + ch];
        ++count;
      };
      visit(x - 1, y);
      visit(x + 1, y);
      visit(x, y - 1);
      visit(x, y + 1);
      if (count == 0) {
        all_known = false;
        continue;
      }
      for (int ch = 0; ch < 3; ++ch) {
        const float v = sum[ch] / static_cast<float>(count);
        if (known[i]) max_change = std::max(max_change, std::abs(v - cur[3 * i + ch]));
        else max_change = 1.0f;
        next[3 * i + ch] = v;
      }
      next_known[i] = 1;
    }
    std::swap(cur, next);
    known = next_known;
    for (size_t i : hole_pixels) {
      for (int ch = 0; ch < 3; ++ch) next[3 * i + ch] = cur[3 * i + ch];
    }
    if (all_known && max_change < 1e-6f) break;
  }
  bool leftovers = false;
  for (size_t i : hole_pixels) leftovers = leftovers || !known[i];
  if (leftovers) {
    const std::vector<float> fallback = pull_push(image, holes);
    for (size_t i : hole_pixels) {
      if (known[i]) continue;
      for (int ch = 0; ch < 3; ++ch) cur[3 * i + ch] = fallback[3 * i + ch];
    }
  }
  return cur;
}

}  // namespace

InpaintMethod parse_inpaint_method(const std::string& name) {
  if (name == "pullpush") return InpaintMethod::kPullPush;
  if (name == "diffusion") return InpaintMethod::kDiffusion;
  if (name == "none") return InpaintMethod::kNone;
  throw Error(ErrorKind::kInvalidArgument, "unknown inpaint method '" + name + "'");
}

std::string to_string(InpaintMethod method) {
  switch (method) {
    case InpaintMethod::kPullPush: return "pullpush";
    case InpaintMethod::kDiffusion: return "diffusion";
    case InpaintMethod::kNone: return "none";
  }
  return "?";
}

void InpaintConfig::validate() const {
  if (iterations < 1) throw Error(ErrorKind::kInvalidArgument, "inpaint iterations must be >= 1");
}

InpaintResult fill(const ImageBuffer& image, const Mask& holes, const InpaintConfig& cfg) {
  cfg.validate();
  if (holes.width() != image.width() || holes.height() != image.height()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "inpaint: image " + shape_string(image.width(), image.height()) + ", hole mask " +
                    shape_string(holes.width(), holes.height()));
  }
  InpaintResult result{image, false};
  const size_t hole_count = holes.count();
  if (hole_count == 0 || cfg.method == InpaintMethod::kNone) return result;
  if (hole_count == image.pixel_count()) {
    result.image = ImageBuffer(image.width(), image.height(), Color::Constant(0.5f));
    result.no_valid_pixels = true;
    return result;
  }
  const std::vector<float> filled = cfg.method == InpaintMethod::kPullPush
                                        ? pull_push(image, holes)
                                        : diffuse(image, holes, cfg.iterations);
  for (size_t i = 0; i < image.pixel_count(); ++i) {
    if (!holes.at(i)) continue;
    Color c(filled[3 * i], filled[3 * i + 1], filled[3 * i + 2]);
    result.image.set_pixel(i, c.cwiseMax(0.0f).cwiseMin(1.0f));
  }
  return result;
}

}  // namespace latcomp
