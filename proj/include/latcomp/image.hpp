#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace latcomp {

using Color = Eigen::Vector3f;

// Row-major H x W raster of booleans (stored as bytes so spans are cheap).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool value = false)
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, value ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }

  bool operator()(int x, int y) const { return data_[index(x, y)] != 0; }
  bool at(size_t i) const { return data_[i] != 0; }
  void set(int x, int y, bool v) { data_[index(x, y)] = v ? 1 : 0; }
  void set(size_t i, bool v) { data_[i] = v ? 1 : 0; }

  size_t count() const;
  const std::vector<uint8_t>& data() const { return data_; }
  std::vector<uint8_t>& data() { return data_; }

  bool operator==(const Mask&) const = default;

 private:
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> data_;
};

// Interleaved RGB raster, channels in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, const Color& fill = Color::Zero());

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

  Color pixel(int x, int y) const { return pixel(index(x, y)); }
  Color pixel(size_t i) const {
    return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]};
  }
  void set_pixel(int x, int y, const Color& c) { set_pixel(index(x, y), c); }
  void set_pixel(size_t i, const Color& c) {
    data_[3 * i] = c[0];
    data_[3 * i + 1] = c[1];
    data_[3 * i + 2] = c[2];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  const std::vector<float>& values() const { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Metric z-depth raster. Invalid pixels hold +inf; validity is derived from
// the stored value so the sentinel and the mask can never disagree.
class DepthMap {
 public:
  static constexpr double kInvalid = std::numeric_limits<double>::infinity();

  DepthMap() = default;
  DepthMap(int width, int height, double fill = kInvalid);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const { return values_.size(); }

  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double at(size_t i) const { return values_[i]; }
  bool valid(int x, int y) const { return valid(index(x, y)); }
  bool valid(size_t i) const { return is_valid_depth(values_[i]); }

  // Non-finite or non-positive values are stored as the invalid sentinel.
  void set(int x, int y, double d) { set(index(x, y), d); }
  void set(size_t i, double d) { values_[i] = is_valid_depth(d) ? d : kInvalid; }
  void invalidate(size_t i) { values_[i] = kInvalid; }

  Mask validity() const;
  size_t valid_count() const;
  const std::vector<double>& values() const { return values_; }

  bool operator==(const DepthMap&) const = default;

  static bool is_valid_depth(double d) { return std::isfinite(d) && d > 0.0; }

 private:
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

std::string shape_string(int width, int height);

// Rounds every channel to the nearest 8-bit level, matching what a PNG
// round trip would produce.
ImageBuffer quantize_8bit(const ImageBuffer& image);

// Rounds every valid depth to float32, matching a PFM round trip.
DepthMap quantize_float32(const DepthMap& depth);

}  // namespace latcomp
