#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "occond/grid.hpp"

namespace occond::io {

/// PFM: "Pf" (1 channel) or "PF" (3 channels), scale -1 (little-endian),
/// rows stored bottom-up. `comment` lines, if any, are written after the
/// magic as "# ..." and skipped by read_pfm.
void write_pfm(const std::filesystem::path& path, const FloatMap& image,
               const std::vector<std::string>& comments = {});
FloatMap read_pfm(const std::filesystem::path& path, std::vector<std::string>* comments = nullptr);

std::vector<std::uint8_t> encode_pfm(const FloatMap& image,
                                     const std::vector<std::string>& comments = {});
FloatMap decode_pfm(const std::vector<std::uint8_t>& bytes, const std::string& name,
                    std::vector<std::string>* comments = nullptr);

/// 8-bit PNG with 1 (gray) or 3 (RGB) channels.
void write_png8(const std::filesystem::path& path, const Grid<std::uint8_t>& image);
/// 16-bit grayscale PNG.
void write_png16(const std::filesystem::path& path, const Grid<std::uint16_t>& image);

struct PngImage {
  int bit_depth = 8;
  Grid<std::uint16_t> pixels;  // 8-bit data is widened
};
PngImage read_png(const std::filesystem::path& path);

/// Binary {0,1} map as 0/255 grayscale.
void write_mask_png(const std::filesystem::path& path, const BinaryMap& mask);
/// Gray PNG thresholded at 128 -> {0,1}.
BinaryMap read_mask_png(const std::filesystem::path& path);
/// Gray PNG scaled to [0,1] weights (value / max for the bit depth).
FloatMap read_weight_png(const std::filesystem::path& path);

/// Counts saturate at 65535.
void write_count_png(const std::filesystem::path& path, const CountMap& count);
CountMap read_count_png(const std::filesystem::path& path);

/// Unit normals n -> (n + 1) / 2 * 255; zero normals map to black.
Grid<std::uint8_t> normal_to_rgb(const FloatMap& normal);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace occond::io
