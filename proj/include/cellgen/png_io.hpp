#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cellgen/grid.hpp"

namespace cellgen {

/// Decoded PNG samples. Palette images are expanded to RGB; bit depths below
/// 8 are expanded to 8. Samples are interleaved per pixel.
struct PngData {
    int rows = 0;
    int cols = 0;
    int channels = 0;   ///< 1 grey, 2 grey+alpha, 3 RGB, 4 RGBA
    int bit_depth = 0;  ///< 8 or 16
    std::vector<std::uint16_t> samples;
};

PngData read_png(const std::filesystem::path& path);

/// Writes without timestamps or other time-dependent chunks, so equal inputs
/// give byte-identical files.
void write_png(const std::filesystem::path& path, const PngData& data);

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& img);
void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& img);

}  // namespace cellgen
