#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tacsim {

// Row-major raster; pixel (u, v) lives at data[v * width + u].
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  const T& at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(int w, int h) const { return width == w && height == h; }
};

using Rgb = std::array<std::uint8_t, 3>;

using MaskImage = Raster<std::uint8_t>;  // values in {0, 1}
using GrayImage = Raster<double>;        // values in [0, 1]
using RgbImage = Raster<Rgb>;

std::size_t count_set(const MaskImage& mask);

// Binary netpbm encodings (P5 / P6, maxval 255).
std::vector<std::byte> encode_pgm(const Raster<std::uint8_t>& gray8);
std::vector<std::byte> encode_ppm(const RgbImage& rgb);
Raster<std::uint8_t> decode_pgm(std::span<const std::byte> bytes);
RgbImage decode_ppm(std::span<const std::byte> bytes);

// Mask as 0/255, depth as round(255 * value).
Raster<std::uint8_t> to_gray8(const MaskImage& mask);
Raster<std::uint8_t> to_gray8(const GrayImage& image);

}  // namespace tacsim
