#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sbsim/core.hpp"
#include "sbsim/grid.hpp"

namespace sbsim {

// Grayscale raster, intensities in [0, 1].
struct RasterImage {
  Grid2D<double> pixels;

  int width() const { return pixels.cols(); }
  int height() const { return pixels.rows(); }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> data;  // 3 bytes per pixel, row-major

  unsigned char* at(int r, int c) { return &data[(static_cast<std::size_t>(r) * width + c) * 3]; }
};

namespace detail {

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace detail

inline RasterImage read_png_gray(const std::string& path) {
  detail::PngReadCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) fail<ConfigError>("cannot open image '", path, "'");
  unsigned char header[8];
  if (std::fread(header, 1, 8, ctx.fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    fail<ParseError>("'", path, "' is not a PNG file");
  }
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) fail<Error>("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail<ParseError>("libpng failed reading '", path, "'");
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  png_set_strip_16(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_set_expand(ctx.png);
  const int color = png_get_color_type(ctx.png, ctx.info);
  if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(ctx.png, 1, -1.0, -1.0);
  png_read_update_info(ctx.png, ctx.info);

  const int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  const int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  std::vector<unsigned char> row(png_get_rowbytes(ctx.png, ctx.info));
  RasterImage img;
  img.pixels = Grid2D<double>(h, w, 0.0);
  for (int r = 0; r < h; ++r) {
    png_read_row(ctx.png, row.data(), nullptr);
    for (int c = 0; c < w; ++c) img.pixels(r, c) = row[c] / 255.0;
  }
  return img;
}

inline void write_png_rgb(const RgbImage& img, const std::string& path) {
  detail::PngWriteCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) fail<ConfigError>("cannot open '", path, "' for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) fail<Error>("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail<Error>("libpng failed writing '", path, "'");
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int r = 0; r < img.height; ++r) {
    png_write_row(ctx.png,
                  const_cast<png_bytep>(&img.data[static_cast<std::size_t>(r) * img.width * 3]));
  }
  png_write_end(ctx.png, nullptr);
}

// PGM (P2 ascii / P5 binary), maxval up to 65535.
inline RasterImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail<ConfigError>("cannot open image '", path, "'");
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") fail<ParseError>("'", path, "' is not a PGM file");
  auto next_int = [&in, &path]() {
    // Skip whitespace and '#' comments.
    while (true) {
      const int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    long v;
    if (!(in >> v)) fail<ParseError>("'", path, "': truncated PGM header");
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0) fail<ParseError>("'", path, "': bad PGM dimensions");
  RasterImage img;
  img.pixels = Grid2D<double>(static_cast<int>(h), static_cast<int>(w), 0.0);
  if (magic == "P2") {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        long v;
        if (!(in >> v)) fail<ParseError>("'", path, "': truncated PGM data");
        img.pixels(r, c) = static_cast<double>(v) / maxval;
      }
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * bytes);
    for (int r = 0; r < h; ++r) {
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      if (!in) fail<ParseError>("'", path, "': truncated PGM data");
      for (int c = 0; c < w; ++c) {
        const long v = bytes == 1 ? buf[c] : (buf[2 * c] << 8) | buf[2 * c + 1];
        img.pixels(r, c) = static_cast<double>(v) / maxval;
      }
    }
  }
  return img;
}

inline void write_pgm(const RasterImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail<ConfigError>("cannot open '", path, "' for writing");
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const double v = std::min(std::max(img.pixels(r, c), 0.0), 1.0);
      out.put(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
    }
  }
}

inline void write_ppm(const RgbImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail<ConfigError>("cannot open '", path, "' for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline RasterImage read_image(const std::string& path) {
  if (ends_with(path, ".pgm") || ends_with(path, ".PGM")) return read_pgm(path);
  return read_png_gray(path);
}

inline void write_image(const RgbImage& img, const std::string& path) {
  if (ends_with(path, ".ppm") || ends_with(path, ".PPM")) {
    write_ppm(img, path);
  } else {
    write_png_rgb(img, path);
  }
}

}  // namespace sbsim
