#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "advlab/tensor.hpp"

namespace advlab {

// Binary netpbm: P6 (RGB) and P5 (gray), maxval 255 only.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

// In-memory forms of the above, used by the file functions.
Image decode_netpbm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_netpbm(const Image& img);

// round(v * 255) with halves rounded up, clamped to [0, 255].
std::uint8_t quantize(double v);

}  // namespace advlab
