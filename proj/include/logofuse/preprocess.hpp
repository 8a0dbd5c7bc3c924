#pragma once

#include "logofuse/image.hpp"

namespace logofuse {

struct PreprocessOptions {
  // Per-channel distance under which a border pixel counts as background.
  int border_tolerance = 8;
  // A mask boundary pixel is "white" when every channel is >= 255 - white_tolerance.
  int white_tolerance = 8;
};

struct CropRect {
  int x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

// Bounds kept by crop_uniform_border; a fully uniform image yields a 1x1
// rectangle at the origin.
CropRect uniform_border_bounds(const RasterImage& img, int tolerance = 8);
TextMask crop_mask(const TextMask& mask, const CropRect& rect);

// Strips outer rows/columns whose pixels all lie within `tolerance` of the
// corner-majority color. A fully uniform image collapses to 1x1.
RasterImage crop_uniform_border(const RasterImage& img, int tolerance = 8);

// Replaces masked pixels: white when the mask's outer boundary ring is white,
// otherwise the rounded mean color of that ring. Unmasked pixels are copied.
RasterImage fill_text_region(const RasterImage& img, const TextMask& mask,
                             int white_tolerance = 8);

// Bilinear resample to 256x256 (corner-aligned) and scale samples by 1/255.
NormalizedImage resize_normalize(const RasterImage& img);

namespace serial {
NormalizedImage resize_normalize(const RasterImage& img);
}  // namespace serial

}  // namespace logofuse
