#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fairaudit {

// Interleaved 8-bit raster. channels: 1 = gray, 2 = gray+alpha, 3 = RGB,
// 4 = RGBA.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  static Raster make(int width, int height, int channels, uint8_t fill = 0);

  uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return width == 0 || height == 0; }
};

// Signed per-pixel attribution raster, row 0 at the top.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  static FloatImage make(int width, int height, float fill = 0.0f);

  float at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

// Binary occlusion mask aligned with a probe image; occluded[i] is 0 or 1.
struct OcclusionMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> occluded;

  static OcclusionMask make(int width, int height);

  bool at(int x, int y) const { return occluded[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool value) {
    occluded[static_cast<size_t>(y) * width + x] = value ? 1 : 0;
  }
  size_t count() const;
};

// PNG. 8-bit only; palette images are expanded to RGB, 16-bit input is
// rejected. Written files are deterministic for identical pixel content.
Raster read_png(const std::string& path);
void write_png(const std::string& path, const Raster& raster);

// Mask PNG contract: single-channel, 255 = occluded, 0 = clear. Any other
// sample value is a parse error.
OcclusionMask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const OcclusionMask& mask);

// Grayscale portable float map. Rows are stored bottom-to-top per the format;
// the scale sign carries endianness. Writer emits little-endian (scale -1).
FloatImage read_pfm(const std::string& path);
void write_pfm(const std::string& path, const FloatImage& image);

}  // namespace fairaudit
