#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace blurgs {

struct LoadedImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;  // channel-last, values k / 255
};

// 8-bit PNG with 1 (gray) or 3 (RGB) channels; values are clamped to [0, 1] and rounded.
// Throws std::runtime_error on I/O failure.
void write_png(const std::filesystem::path& path, std::span<const double> data, int width, int height, int channels);
LoadedImage read_png(const std::filesystem::path& path);

// Single-channel little-endian PFM ("Pf"), rows stored top to bottom in memory and bottom to
// top in the file as the format requires. Values round-trip at float precision.
void write_pfm(const std::filesystem::path& path, std::span<const double> data, int width, int height);
LoadedImage read_pfm(const std::filesystem::path& path);

}  // namespace blurgs
