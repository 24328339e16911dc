#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocrsynth/common.hpp"

namespace ocrsynth {

// 8-bit grayscale raster. White (255) background, dark ink.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, width*height

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 255)
      : width(w), height(h), pixels(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw Error("GrayImage: dimensions must be positive");
  }

  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }

  bool operator==(const GrayImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }

  // Fraction of pixels darker than the threshold.
  double ink_fraction(uint8_t threshold = 128) const {
    if (pixels.empty()) return 0.0;
    size_t ink = 0;
    for (uint8_t p : pixels)
      if (p < threshold) ++ink;
    return static_cast<double>(ink) / static_cast<double>(pixels.size());
  }
};

inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::string data = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  data.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  write_file(path, data);
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  if (next_token() != "P5") throw Error("read_pgm: not a binary PGM: " + path.string());
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (maxval != 255) throw Error("read_pgm: unsupported maxval: " + path.string());
  ++pos;  // single whitespace after header
  const size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
  if (data.size() - pos < need) throw Error("read_pgm: truncated pixel data: " + path.string());
  GrayImage img(w, h);
  std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(pos), need, img.pixels.begin());
  return img;
}

}  // namespace ocrsynth
