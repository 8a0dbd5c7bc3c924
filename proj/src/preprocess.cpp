#include "logofuse/preprocess.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace logofuse {

namespace {

bool near(const Rgb& a, const Rgb& b, int tol) {
  for (int c = 0; c < 3; ++c) {
    if (std::abs(int(a[c]) - int(b[c])) > tol) return false;
  }
  return true;
}

Rgb corner_majority(const RasterImage& img, int tol) {
  const int w = img.width() - 1;
  const int h = img.height() - 1;
  const Rgb corners[4] = {img.at(0, 0), img.at(w, 0), img.at(0, h), img.at(w, h)};
  int best = 0;
  int best_votes = -1;
  for (int i = 0; i < 4; ++i) {
    int votes = 0;
    for (int j = 0; j < 4; ++j) votes += near(corners[i], corners[j], tol) ? 1 : 0;
    if (votes > best_votes) {
      best = i;
      best_votes = votes;
    }
  }
  return corners[best];
}

// Source coordinate for output index i under corner alignment.
inline void source_coord(int i, int src_len, int& i0, int& i1, float& frac) {
  if (src_len == 1) {
    i0 = i1 = 0;
    frac = 0.0f;
    return;
  }
  const double pos = static_cast<double>(i) * (src_len - 1) / (NormalizedImage::kSide - 1);
  i0 = static_cast<int>(std::floor(pos));
  if (i0 >= src_len - 1) i0 = src_len - 1;
  i1 = i0 + 1 < src_len ? i0 + 1 : i0;
  frac = static_cast<float>(pos - i0);
}

inline void resize_row(const RasterImage& img, int y, float* out) {
  constexpr int side = NormalizedImage::kSide;
  constexpr float inv255 = 1.0f / 255.0f;
  int y0, y1;
  float fy;
  source_coord(y, img.height(), y0, y1, fy);
  for (int x = 0; x < side; ++x) {
    int x0, x1;
    float fx;
    source_coord(x, img.width(), x0, x1, fx);
    const Rgb p00 = img.at(x0, y0), p10 = img.at(x1, y0);
    const Rgb p01 = img.at(x0, y1), p11 = img.at(x1, y1);
    for (int c = 0; c < 3; ++c) {
      const float top = p00[c] + (p10[c] - p00[c]) * fx;
      const float bottom = p01[c] + (p11[c] - p01[c]) * fx;
      float v = (top + (bottom - top) * fy) * inv255;
      v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      out[x * 3 + c] = v;
    }
  }
}

}  // namespace

namespace {

struct Bounds {
  CropRect rect;
  Rgb background;
  bool uniform = false;
};

Bounds find_bounds(const RasterImage& img, int tolerance) {
  if (tolerance < 0) throw InvalidArgument("border tolerance must be >= 0");
  const Rgb bg = corner_majority(img, tolerance);
  const auto row_uniform = [&](int y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!near(img.at(x, y), bg, tolerance)) return false;
    }
    return true;
  };
  const auto col_uniform = [&](int x, int y0, int y1) {
    for (int y = y0; y <= y1; ++y) {
      if (!near(img.at(x, y), bg, tolerance)) return false;
    }
    return true;
  };

  int top = 0, bottom = img.height() - 1;
  while (top <= bottom && row_uniform(top)) ++top;
  if (top > bottom) return {{0, 0, 1, 1}, bg, true};
  while (row_uniform(bottom)) --bottom;
  int left = 0, right = img.width() - 1;
  while (col_uniform(left, top, bottom)) ++left;
  while (col_uniform(right, top, bottom)) --right;
  return {{left, top, right - left + 1, bottom - top + 1}, bg, false};
}

}  // namespace

CropRect uniform_border_bounds(const RasterImage& img, int tolerance) {
  return find_bounds(img, tolerance).rect;
}

TextMask crop_mask(const TextMask& mask, const CropRect& rect) {
  if (rect.x < 0 || rect.y < 0 || rect.width < 1 || rect.height < 1 ||
      rect.x + rect.width > mask.width() || rect.y + rect.height > mask.height()) {
    throw InvalidArgument("crop rectangle outside mask");
  }
  TextMask out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y) {
    for (int x = 0; x < rect.width; ++x) out.set(x, y, mask.at(rect.x + x, rect.y + y));
  }
  return out;
}

RasterImage crop_uniform_border(const RasterImage& img, int tolerance) {
  const auto b = find_bounds(img, tolerance);
  if (b.uniform) return RasterImage(1, 1, b.background);
  if (b.rect == CropRect{0, 0, img.width(), img.height()}) return img;
  return img.sub_image(b.rect.x, b.rect.y, b.rect.width, b.rect.height);
}

RasterImage fill_text_region(const RasterImage& img, const TextMask& mask, int white_tolerance) {
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw InvalidArgument("mask is " + std::to_string(mask.width()) + "x" +
                          std::to_string(mask.height()) + " but image is " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const int w = img.width(), h = img.height();
  const auto touches_mask = [&](int x, int y) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < w && ny < h && mask.at(nx, ny)) return true;
      }
    }
    return false;
  };

  bool any_masked = false;
  bool ring_white = true;
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint64_t ring = 0;
  const int white_floor = 255 - white_tolerance;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) {
        any_masked = true;
        continue;
      }
      if (!touches_mask(x, y)) continue;
      const Rgb p = img.at(x, y);
      for (int c = 0; c < 3; ++c) {
        sum[c] += p[c];
        if (p[c] < white_floor) ring_white = false;
      }
      ++ring;
    }
  }
  if (!any_masked) return img;

  Rgb fill = {255, 255, 255};
  if (ring > 0 && !ring_white) {
    for (int c = 0; c < 3; ++c) fill[c] = static_cast<std::uint8_t>((sum[c] + ring / 2) / ring);
  }
  RasterImage out = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) out.set(x, y, fill);
    }
  }
  return out;
}

NormalizedImage resize_normalize(const RasterImage& img) {
  constexpr int side = NormalizedImage::kSide;
  NormalizedImage out;
  out.data.resize(static_cast<std::size_t>(side) * side * 3);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < side; ++y) {
    resize_row(img, y, &out.data[static_cast<std::size_t>(y) * side * 3]);
  }
  return out;
}

namespace serial {

NormalizedImage resize_normalize(const RasterImage& img) {
  constexpr int side = NormalizedImage::kSide;
  NormalizedImage out;
  out.data.resize(static_cast<std::size_t>(side) * side * 3);
  for (int y = 0; y < side; ++y) {
    resize_row(img, y, &out.data[static_cast<std::size_t>(y) * side * 3]);
  }
  return out;
}

}  // namespace serial

}  // namespace logofuse
