#include "tacsim/image.hpp"

#include "tacsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace tacsim {

std::size_t count_set(const MaskImage& mask) {
  return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(), [](auto v) { return v != 0; }));
}

namespace {

std::vector<std::byte> encode_netpbm(const char* magic, int width, int height, const std::uint8_t* pixels,
                                     std::size_t nbytes) {
  const std::string header = std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::byte> out(header.size() + nbytes);
  std::memcpy(out.data(), header.data(), header.size());
  if (nbytes > 0) std::memcpy(out.data() + header.size(), pixels, nbytes);
  return out;
}

struct NetpbmHeader {
  int width = 0;
  int height = 0;
  std::size_t data_offset = 0;
};

NetpbmHeader decode_header(std::span<const std::byte> bytes, const char* magic) {
  auto at = [&](std::size_t i) { return static_cast<char>(bytes[i]); };
  if (bytes.size() < 2 || at(0) != magic[0] || at(1) != magic[1]) {
    throw ParseError(std::string("expected netpbm magic ") + magic, 0);
  }
  std::size_t pos = 2;
  int values[3] = {0, 0, 0};
  for (int& value : values) {
    while (pos < bytes.size()) {
      const char c = at(pos);
      if (c == '#') {
        while (pos < bytes.size() && at(pos) != '\n') ++pos;
      } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && at(pos) >= '0' && at(pos) <= '9') value = value * 10 + (at(pos++) - '0');
    if (pos == start) throw ParseError("malformed netpbm header", pos);
  }
  if (values[2] != 255) throw ParseError("only maxval 255 is supported", pos);
  ++pos;  // single whitespace before raster
  return {values[0], values[1], pos};
}

}  // namespace

std::vector<std::byte> encode_pgm(const Raster<std::uint8_t>& gray8) {
  return encode_netpbm("P5", gray8.width, gray8.height, gray8.data.data(), gray8.data.size());
}

std::vector<std::byte> encode_ppm(const RgbImage& rgb) {
  return encode_netpbm("P6", rgb.width, rgb.height, reinterpret_cast<const std::uint8_t*>(rgb.data.data()),
                       rgb.data.size() * 3);
}

Raster<std::uint8_t> decode_pgm(std::span<const std::byte> bytes) {
  const auto h = decode_header(bytes, "P5");
  Raster<std::uint8_t> out(h.width, h.height);
  if (bytes.size() < h.data_offset + out.size()) throw ParseError("truncated PGM raster", bytes.size());
  std::memcpy(out.data.data(), bytes.data() + h.data_offset, out.size());
  return out;
}

RgbImage decode_ppm(std::span<const std::byte> bytes) {
  const auto h = decode_header(bytes, "P6");
  RgbImage out(h.width, h.height);
  if (bytes.size() < h.data_offset + out.size() * 3) throw ParseError("truncated PPM raster", bytes.size());
  std::memcpy(out.data.data(), bytes.data() + h.data_offset, out.size() * 3);
  return out;
}

Raster<std::uint8_t> to_gray8(const MaskImage& mask) {
  Raster<std::uint8_t> out(mask.width, mask.height);
  std::transform(mask.data.begin(), mask.data.end(), out.data.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
  return out;
}

Raster<std::uint8_t> to_gray8(const GrayImage& image) {
  Raster<std::uint8_t> out(image.width, image.height);
  std::transform(image.data.begin(), image.data.end(), out.data.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  });
  return out;
}

}  // namespace tacsim
