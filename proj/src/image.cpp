#include "latcomp/image.hpp"

#include <algorithm>
#include <numeric>

namespace latcomp {

size_t Mask::count() const {
  return static_cast<size_t>(std::count(data_.begin(), data_.end(), uint8_t{1}));
}

ImageBuffer::ImageBuffer(int width, int height, const Color& fill)
    : width_(width), height_(height), data_(3 * pixel_count()) {
  for (size_t i = 0; i < pixel_count(); ++i) set_pixel(i, fill);
}

DepthMap::DepthMap(int width, int height, double fill)
    : width_(width), height_(height),
      values_(static_cast<size_t>(width) * height,
              is_valid_depth(fill) ? fill : kInvalid) {}

Mask DepthMap::validity() const {
  Mask m(width_, height_);
  for (size_t i = 0; i < values_.size(); ++i) m.set(i, valid(i));
  return m;
}

size_t DepthMap::valid_count() const {
  return static_cast<size_t>(std::count_if(values_.begin(), values_.end(), is_valid_depth));
}

std::string shape_string(int width, int height) {
  return std::to_string(width) + "x" + std::to_string(height);
}

ImageBuffer quantize_8bit(const ImageBuffer& image) {
  ImageBuffer out = image;
  float* p = out.data();
  for (size_t i = 0; i < 3 * out.pixel_count(); ++i) {
    const float c = std::clamp(p[i], 0.0f, 1.0f);
    p[i] = static_cast<float>(std::lround(c * 255.0f)) / 255.0f;
  }
  return out;
}

DepthMap quantize_float32(const DepthMap& depth) {
  DepthMap out(depth.width(), depth.height());
  for (size_t i = 0; i < depth.pixel_count(); ++i) {
    if (depth.valid(i)) out.set(i, static_cast<double>(static_cast<float>(depth.at(i))));
  }
  return out;
}

}  // namespace latcomp
