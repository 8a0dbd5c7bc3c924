#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "logofuse/error.hpp"

namespace logofuse {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major, interleaved.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {255, 255, 255});
  RasterImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  Rgb at(int x, int y) const {
    const auto* p = &data_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = &data_[index(x, y)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  RasterImage sub_image(int x0, int y0, int w, int h) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Boolean text mask; true marks a text pixel.
class TextMask {
 public:
  TextMask() = default;
  TextMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t count() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Fixed-size float image with samples in [0,1], row-major interleaved RGB.
struct NormalizedImage {
  static constexpr int kSide = 256;
  int width = kSide;
  int height = kSide;
  std::vector<float> data;  // width * height * 3

  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

}  // namespace logofuse
