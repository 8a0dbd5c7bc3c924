#pragma once

#include <string>

#include "logofuse/image.hpp"

namespace logofuse {

// Reads PNG or JPEG (detected from the file signature). Alpha is flattened
// onto white.
RasterImage read_image(const std::string& path);
// Decodes an in-memory PNG or JPEG buffer (uploaded queries).
RasterImage decode_image(std::span<const std::uint8_t> bytes);

void write_png(const std::string& path, const RasterImage& img);

// Single-channel PNG; any nonzero sample marks a text pixel.
TextMask read_mask(const std::string& path);
void write_mask_png(const std::string& path, const TextMask& mask);

}  // namespace logofuse
