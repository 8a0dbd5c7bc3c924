#include "logofuse/image.hpp"

#include <algorithm>
#include <string>

namespace logofuse {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidArgument("image dimensions must be >= 1");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw InvalidArgument("image dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x3");
  }
}

RasterImage RasterImage::sub_image(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > width_ || y0 + h > height_) {
    throw InvalidArgument("sub-image out of bounds");
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const auto* src = &data_[index(x0, y0 + y)];
    std::copy(src, src + static_cast<std::size_t>(w) * 3, &out[static_cast<std::size_t>(y) * w * 3]);
  }
  return RasterImage(w, h, std::move(out));
}

TextMask::TextMask(int width, int height, bool fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {
  if (width < 1 || height < 1) throw InvalidArgument("mask dimensions must be >= 1");
}

std::size_t TextMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

}  // namespace logofuse
