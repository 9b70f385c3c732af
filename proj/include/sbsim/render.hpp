#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "sbsim/grid.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/image_io.hpp"

namespace sbsim {

struct HeatmapOptions {
  bool diverging = false;  // center the palette at zero (difference fields)
  std::string sidecar_path;  // defaults to out path + ".txt"
};

namespace detail {

// Blue-white-red ramp, x in [-1, 1].
inline void diverging_color(double x, unsigned char* rgb) {
  x = std::clamp(x, -1.0, 1.0);
  if (x < 0) {
    rgb[0] = static_cast<unsigned char>(255 * (1.0 + x));
    rgb[1] = static_cast<unsigned char>(255 * (1.0 + x));
    rgb[2] = 255;
  } else {
    rgb[0] = 255;
    rgb[1] = static_cast<unsigned char>(255 * (1.0 - x));
    rgb[2] = static_cast<unsigned char>(255 * (1.0 - x));
  }
}

}  // namespace detail

// Renders a temperature (or temperature-difference) field. Wall cells are
// dark gray, exterior cells black; interior values map onto a
// blue-white-red palette, centered at zero for difference fields. The
// extreme values and their cells go to a sidecar text file.
inline void render_heatmap(const Grid2D<double>& field, const Grid2D<CellClass>& classes,
                           const std::string& out_path, const HeatmapOptions& opts = {}) {
  if (!field.same_shape(classes)) fail<ValidationError>("render_heatmap: field/class shape mismatch");
  double lo = 0.0, hi = 0.0;
  int lo_r = 0, lo_c = 0, hi_r = 0, hi_c = 0;
  bool first = true;
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (classes(r, c) != CellClass::InteriorAir) continue;
      const double v = field(r, c);
      if (!std::isfinite(v)) continue;  // no data (e.g. unzoned cells)
      if (first || v < lo) {
        lo = v;
        lo_r = r;
        lo_c = c;
      }
      if (first || v > hi) {
        hi = v;
        hi_r = r;
        hi_c = c;
      }
      first = false;
    }
  }

  double center, scale;
  if (opts.diverging) {
    center = 0.0;
    scale = std::max(std::abs(lo), std::abs(hi));
  } else {
    center = (lo + hi) / 2.0;
    scale = (hi - lo) / 2.0;
  }
  if (scale <= 0.0) scale = 1.0;

  RgbImage img;
  img.width = field.cols();
  img.height = field.rows();
  img.data.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      unsigned char* px = img.at(r, c);
      switch (classes(r, c)) {
        case CellClass::ExteriorAir:
          px[0] = px[1] = px[2] = 0;
          break;
        case CellClass::InteriorWall:
        case CellClass::ExteriorWall:
          px[0] = px[1] = px[2] = 64;
          break;
        case CellClass::InteriorAir:
          if (std::isfinite(field(r, c))) {
            detail::diverging_color((field(r, c) - center) / scale, px);
          } else {
            px[0] = px[1] = px[2] = 160;
          }
          break;
      }
    }
  }
  write_image(img, out_path);

  const std::string sidecar = opts.sidecar_path.empty() ? out_path + ".txt" : opts.sidecar_path;
  std::ofstream side(sidecar);
  if (!side) fail<ConfigError>("cannot write '", sidecar, "'");
  side << "min " << lo << " at (" << lo_r << "," << lo_c << ")\n";
  side << "max " << hi << " at (" << hi_r << "," << hi_c << ")\n";
}

}  // namespace sbsim
