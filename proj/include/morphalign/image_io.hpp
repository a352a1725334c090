#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "morphalign/image.hpp"

namespace morphalign {

using Bytes = std::vector<std::uint8_t>;

// Decodes PNG or JPEG (detected from the file signature). Samples are v/255;
// grayscale sources are replicated to 3 channels and alpha is dropped.
ImageF load_image(const std::filesystem::path& path);
ImageF decode_image(std::span<const std::uint8_t> bytes);

// 8-bit quantization used by every encoder: round(clamp(v,0,1) * 255).
std::uint8_t to_byte(double v) noexcept;

Bytes encode_png(const ImageF& img);
// Baseline JPEG, 4:2:0 chroma subsampling for color input.
Bytes encode_jpeg(const ImageF& img, int quality);

// Format chosen by extension: .png, .jpg/.jpeg.
void save_image(const std::filesystem::path& path, const ImageF& img, int jpeg_quality = 95);

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
Bytes read_bytes(const std::filesystem::path& path);

}  // namespace morphalign
