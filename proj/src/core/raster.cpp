#include "core/raster.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numeric>

#include "core/error.hpp"

namespace fairaudit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  (void)png;
  raise(ErrorCode::Parse, std::string("libpng: ") + msg);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

Raster Raster::make(int width, int height, int channels, uint8_t fill) {
  if (width <= 0 || height <= 0 || channels < 1 || channels > 4)
    raise(ErrorCode::InvalidInput, "Raster::make: bad dimensions");
  Raster r;
  r.width = width;
  r.height = height;
  r.channels = channels;
  r.data.assign(static_cast<size_t>(width) * height * channels, fill);
  return r;
}

FloatImage FloatImage::make(int width, int height, float fill) {
  if (width <= 0 || height <= 0)
    raise(ErrorCode::InvalidInput, "FloatImage::make: bad dimensions");
  FloatImage img;
  img.width = width;
  img.height = height;
  img.values.assign(static_cast<size_t>(width) * height, fill);
  return img;
}

OcclusionMask OcclusionMask::make(int width, int height) {
  if (width <= 0 || height <= 0)
    raise(ErrorCode::InvalidInput, "OcclusionMask::make: bad dimensions");
  OcclusionMask m;
  m.width = width;
  m.height = height;
  m.occluded.assign(static_cast<size_t>(width) * height, 0);
  return m;
}

size_t OcclusionMask::count() const {
  return std::accumulate(occluded.begin(), occluded.end(), size_t{0});
}

Raster read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) raise(ErrorCode::Io, "cannot open '" + path + "'");

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0)
    raise(ErrorCode::Parse, "'" + path + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_fn, png_warn_fn);
  if (!png) raise(ErrorCode::Internal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(ErrorCode::Internal, "png_create_info_struct failed");
  }

  Raster raster;
  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (bit_depth == 16)
      raise(ErrorCode::InvalidInput,
            "'" + path + "': 16-bit PNG is not supported");
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
      png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels < 1 || channels > 4)
      raise(ErrorCode::Parse, "'" + path + "': unsupported channel count");

    raster = Raster::make(static_cast<int>(width), static_cast<int>(height),
                          channels);
    std::vector<png_bytep> rows(height);
    const size_t stride = static_cast<size_t>(width) * channels;
    for (png_uint_32 y = 0; y < height; ++y)
      rows[y] = raster.data.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void write_png(const std::string& path, const Raster& raster) {
  if (raster.empty() || raster.channels < 1 || raster.channels > 4)
    raise(ErrorCode::InvalidInput, "write_png: empty raster");

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) raise(ErrorCode::Io, "cannot create '" + path + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_fn, png_warn_fn);
  if (!png) raise(ErrorCode::Internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    raise(ErrorCode::Internal, "png_create_info_struct failed");
  }

  static const int kColorTypes[5] = {0, PNG_COLOR_TYPE_GRAY,
                                     PNG_COLOR_TYPE_GRAY_ALPHA,
                                     PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGBA};
  try {
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, raster.width, raster.height, 8,
                 kColorTypes[raster.channels], PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const size_t stride = static_cast<size_t>(raster.width) * raster.channels;
    for (int y = 0; y < raster.height; ++y)
      png_write_row(png, const_cast<png_bytep>(raster.data.data() + y * stride));
    png_write_end(png, info);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

OcclusionMask read_mask_png(const std::string& path) {
  Raster raster = read_png(path);
  if (raster.channels != 1)
    raise(ErrorCode::Parse, "'" + path + "': mask PNG must be single-channel");
  OcclusionMask mask = OcclusionMask::make(raster.width, raster.height);
  for (size_t i = 0; i < raster.data.size(); ++i) {
    const uint8_t v = raster.data[i];
    if (v != 0 && v != 255)
      raise(ErrorCode::Parse, "'" + path + "': mask sample " +
                                  std::to_string(v) + " (must be 0 or 255)");
    mask.occluded[i] = v == 255 ? 1 : 0;
  }
  return mask;
}

void write_mask_png(const std::string& path, const OcclusionMask& mask) {
  Raster raster = Raster::make(mask.width, mask.height, 1);
  for (size_t i = 0; i < mask.occluded.size(); ++i)
    raster.data[i] = mask.occluded[i] ? 255 : 0;
  write_png(path, raster);
}

namespace {

bool host_is_little_endian() {
  return std::endian::native == std::endian::little;
}

float byteswap_float(float value) {
  uint32_t bits;
  std::memcpy(&bits, &value, 4);
  bits = ((bits & 0x000000ffu) << 24) | ((bits & 0x0000ff00u) << 8) |
         ((bits & 0x00ff0000u) >> 8) | ((bits & 0xff000000u) >> 24);
  std::memcpy(&value, &bits, 4);
  return value;
}

// Reads one whitespace-delimited token, treating '#' comments as whitespace.
std::string next_pfm_token(std::FILE* f, const std::string& path) {
  std::string token;
  int ch;
  while ((ch = std::fgetc(f)) != EOF) {
    if (ch == '#') {
      while ((ch = std::fgetc(f)) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty())
    raise(ErrorCode::Parse, "'" + path + "': truncated PFM header");
  return token;
}

}  // namespace

FloatImage read_pfm(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) raise(ErrorCode::Io, "cannot open '" + path + "'");

  const std::string magic = next_pfm_token(file.get(), path);
  if (magic != "Pf") {
    if (magic == "PF")
      raise(ErrorCode::Parse, "'" + path + "': color PFM (PF) not supported, expected grayscale Pf");
    raise(ErrorCode::Parse, "'" + path + "': not a PFM file");
  }
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_pfm_token(file.get(), path));
    height = std::stoi(next_pfm_token(file.get(), path));
    scale = std::stod(next_pfm_token(file.get(), path));
  } catch (const std::exception&) {
    raise(ErrorCode::Parse, "'" + path + "': malformed PFM header");
  }
  if (width <= 0 || height <= 0 || scale == 0.0)
    raise(ErrorCode::Parse, "'" + path + "': malformed PFM header");

  FloatImage image = FloatImage::make(width, height);
  const bool file_little_endian = scale < 0.0;
  const bool swap = file_little_endian != host_is_little_endian();
  std::vector<float> row(static_cast<size_t>(width));
  // PFM rows run bottom-to-top.
  for (int y = height - 1; y >= 0; --y) {
    if (std::fread(row.data(), sizeof(float), row.size(), file.get()) != row.size())
      raise(ErrorCode::Parse, "'" + path + "': truncated PFM data");
    for (int x = 0; x < width; ++x)
      image.at(x, y) = swap ? byteswap_float(row[x]) : row[x];
  }
  return image;
}

void write_pfm(const std::string& path, const FloatImage& image) {
  if (image.width <= 0 || image.height <= 0)
    raise(ErrorCode::InvalidInput, "write_pfm: empty image");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) raise(ErrorCode::Io, "cannot create '" + path + "'");

  std::fprintf(file.get(), "Pf\n%d %d\n-1.0\n", image.width, image.height);
  const bool swap = !host_is_little_endian();
  std::vector<float> row(static_cast<size_t>(image.width));
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x) {
      const float v = image.at(x, y);
      row[x] = swap ? byteswap_float(v) : v;
    }
    if (std::fwrite(row.data(), sizeof(float), row.size(), file.get()) != row.size())
      raise(ErrorCode::Io, "write failure on '" + path + "'");
  }
}

}  // namespace fairaudit
