#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vipscene {

using Rgb = std::array<std::uint8_t, 3>;

/// Packed 8-bit RGB, row-major, top row first.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Binary PPM (P6, maxval 255).
std::string encode_ppm(const RasterImage& image);
RasterImage decode_ppm(const std::string& bytes);
void write_ppm(const std::filesystem::path& path, const RasterImage& image);
RasterImage read_ppm(const std::filesystem::path& path);

/// 8-bit RGB PNG, zlib-compressed, no filtering.
std::string encode_png(const RasterImage& image);
void write_png(const std::filesystem::path& path, const RasterImage& image);

std::string base64_encode(const std::string& bytes);

} // namespace vipscene
