#pragma once

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdp/geometry.hpp"

namespace rdp {

// 16-bit grayscale PNG export, KITTI convention: value = depth * 256,
// saturated at the uint16 range; 0 stays "no measurement". Lossy (1/256 m
// quantization); the PFM path is the lossless one.
inline void write_depth_png16(const std::string& path, const DepthMap& map) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::invalid_argument("write_depth_png16: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("write_depth_png16: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("write_depth_png16: libpng error writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(map.width), png_uint_32(map.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(std::size_t(map.width) * 2);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double d = map.at(x, y);
      std::uint16_t q = 0;
      if (d > 0.0) {
        const double scaled = d * 256.0;
        q = scaled >= 65535.0 ? 65535 : std::uint16_t(scaled + 0.5);
        if (q == 0) q = 1;  // keep tiny depths distinguishable from "invalid"
      }
      row[2 * std::size_t(x)] = std::uint8_t(q >> 8);  // PNG is big-endian
      row[2 * std::size_t(x) + 1] = std::uint8_t(q & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace rdp
