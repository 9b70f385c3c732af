#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/core.hpp"
#include "sbsim/grid.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/image_io.hpp"

namespace sbsim {

using BitGrid = Grid2D<std::uint8_t>;  // 1 = wall, 0 = background

// Step 1: pixels darker than the threshold become wall.
inline BitGrid binarize(const RasterImage& img, double threshold) {
  if (img.pixels.empty()) fail<ValidationError>("binarize: empty image");
  BitGrid out(img.height(), img.width(), 0);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out(r, c) = img.pixels(r, c) < threshold ? 1 : 0;
  }
  return out;
}

// Step 2: erase user-marked feature rectangles (doors, compass marks, ...).
// Rectangles are [row0, col0, row1, col1], inclusive.
struct MaskRect {
  int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
};

inline BitGrid erase_features(const BitGrid& g, const std::vector<MaskRect>& rects) {
  BitGrid out = g;
  for (const MaskRect& m : rects) {
    for (int r = std::max(0, m.row0); r <= std::min(g.rows() - 1, m.row1); ++r) {
      for (int c = std::max(0, m.col0); c <= std::min(g.cols() - 1, m.col1); ++c) out(r, c) = 0;
    }
  }
  return out;
}

namespace morph {

inline BitGrid erode3x3(const BitGrid& g) {
  BitGrid out(g.rows(), g.cols(), 0);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      std::uint8_t v = 1;
      for (int dr = -1; dr <= 1 && v; ++dr) {
        for (int dc = -1; dc <= 1 && v; ++dc) {
          if (g.at_or(r + dr, c + dc, 0) == 0) v = 0;
        }
      }
      out(r, c) = v;
    }
  }
  return out;
}

inline BitGrid dilate3x3(const BitGrid& g) {
  BitGrid out(g.rows(), g.cols(), 0);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      std::uint8_t v = 0;
      for (int dr = -1; dr <= 1 && !v; ++dr) {
        for (int dc = -1; dc <= 1 && !v; ++dc) {
          if (g.at_or(r + dr, c + dc, 0) == 1) v = 1;
        }
      }
      out(r, c) = v;
    }
  }
  return out;
}

}  // namespace morph

// Step 3: n rounds of binary opening (erosion then dilation) kill isolated
// noise while walls at least 3 pixels thick survive.
inline BitGrid denoise(const BitGrid& g, int n_iters) {
  if (n_iters < 0) fail<ValidationError>("denoise: n_iters must be >= 0");
  BitGrid out = g;
  for (int i = 0; i < n_iters; ++i) out = morph::dilate3x3(morph::erode3x3(out));
  return out;
}

// Step 4: block-max pooling so one cell covers cv_size/scale pixels; any wall
// pixel in the block makes the cell a wall.
inline BitGrid downsample(const BitGrid& g, int block) {
  if (block < 1) fail<ValidationError>("downsample: block size must be >= 1");
  const int rows = (g.rows() + block - 1) / block;
  const int cols = (g.cols() + block - 1) / block;
  BitGrid out(rows, cols, 0);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      if (g(r, c)) out(r / block, c / block) = 1;
    }
  }
  return out;
}

// Step 5: background connected (4-adjacency) to the lattice border is
// exterior air; enclosed background is interior air. Walls come out as
// InteriorWall placeholders for thin_walls to reclassify.
inline Grid2D<CellClass> mark_exterior(const BitGrid& g) {
  const int rows = g.rows();
  const int cols = g.cols();
  Grid2D<CellClass> out(rows, cols, CellClass::InteriorAir);
  Grid2D<std::uint8_t> seen(rows, cols, 0);
  std::deque<Cell> queue;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (g(r, c)) {
        out(r, c) = CellClass::InteriorWall;
      } else if (r == 0 || c == 0 || r == rows - 1 || c == cols - 1) {
        if (!seen(r, c)) {
          seen(r, c) = 1;
          queue.push_back({r, c});
        }
      }
    }
  }
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    out(cur.row, cur.col) = CellClass::ExteriorAir;
    for (int d = 0; d < 4; ++d) {
      const int nr = cur.row + kDirDRow[d];
      const int nc = cur.col + kDirDCol[d];
      if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
      if (g(nr, nc) || seen(nr, nc)) continue;
      seen(nr, nc) = 1;
      queue.push_back({nr, nc});
    }
  }
  return out;
}

// Number of 4-connected interior-air components (rooms).
inline int count_rooms(const Grid2D<CellClass>& g) {
  Grid2D<std::uint8_t> seen(g.rows(), g.cols(), 0);
  int count = 0;
  std::deque<Cell> queue;
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      if (g(r, c) != CellClass::InteriorAir || seen(r, c)) continue;
      ++count;
      seen(r, c) = 1;
      queue.push_back({r, c});
      while (!queue.empty()) {
        const Cell cur = queue.front();
        queue.pop_front();
        for (int d = 0; d < 4; ++d) {
          const int nr = cur.row + kDirDRow[d];
          const int nc = cur.col + kDirDCol[d];
          if (!g.in_bounds(nr, nc) || seen(nr, nc) || g(nr, nc) != CellClass::InteriorAir) continue;
          seen(nr, nc) = 1;
          queue.push_back({nr, nc});
        }
      }
    }
  }
  return count;
}

namespace detail_thin {

constexpr std::array<int, 8> kRingDr = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr std::array<int, 8> kRingDc = {-1, 0, 1, -1, 1, -1, 0, 1};

// A wall cell is removable when deletion changes neither the 8-connectivity
// of walls nor the 4-connectivity of air in its neighborhood (a "simple
// point"), and it is not the free end of a wall line.
inline bool is_simple_point(const Grid2D<CellClass>& g, int r, int c) {
  bool wall[8];
  int wall_count = 0;
  for (int i = 0; i < 8; ++i) {
    const int nr = r + kRingDr[i];
    const int nc = c + kRingDc[i];
    wall[i] = g.in_bounds(nr, nc) && is_wall(g(nr, nc));
    wall_count += wall[i] ? 1 : 0;
  }
  if (wall_count <= 1) return false;  // isolated cell or line endpoint

  // Count 8-connected wall components within the ring.
  bool seen[8] = {};
  int wall_components = 0;
  for (int i = 0; i < 8; ++i) {
    if (!wall[i] || seen[i]) continue;
    ++wall_components;
    int stack[8];
    int top = 0;
    stack[top++] = i;
    seen[i] = true;
    while (top) {
      const int cur = stack[--top];
      for (int j = 0; j < 8; ++j) {
        if (!wall[j] || seen[j]) continue;
        if (std::abs(kRingDr[cur] - kRingDr[j]) <= 1 && std::abs(kRingDc[cur] - kRingDc[j]) <= 1) {
          seen[j] = true;
          stack[top++] = j;
        }
      }
    }
  }
  if (wall_components != 1) return false;

  // Count 4-connected air components within the ring that touch an edge
  // neighbor of the cell; more than one means removal would merge air
  // regions (or rooms with the outside).
  bool air[8];
  for (int i = 0; i < 8; ++i) air[i] = !wall[i];
  bool seen_air[8] = {};
  int air_components_adjacent = 0;
  for (int i = 0; i < 8; ++i) {
    const bool edge_neighbor = kRingDr[i] == 0 || kRingDc[i] == 0;
    if (!air[i] || seen_air[i] || !edge_neighbor) continue;
    ++air_components_adjacent;
    int stack[8];
    int top = 0;
    stack[top++] = i;
    seen_air[i] = true;
    while (top) {
      const int cur = stack[--top];
      for (int j = 0; j < 8; ++j) {
        if (!air[j] || seen_air[j]) continue;
        if (std::abs(kRingDr[cur] - kRingDr[j]) + std::abs(kRingDc[cur] - kRingDc[j]) == 1) {
          seen_air[j] = true;
          stack[top++] = j;
        }
      }
    }
  }
  return air_components_adjacent == 1;
}

}  // namespace detail_thin

// Step 6: reduce interior walls to a single CV and exterior walls to the two
// CVs nearest the outside. Sequential simple-point erosion preserves wall
// connectivity and room separation; the outermost two exterior-wall layers
// are anchored and never eroded.
inline Grid2D<CellClass> thin_walls(const Grid2D<CellClass>& input) {
  Grid2D<CellClass> g = input;
  const int rows = g.rows();
  const int cols = g.cols();

  const int rooms_before = count_rooms(input);

  // Anchor the outer two wall layers: cells touching exterior air, plus
  // their wall neighbors.
  Grid2D<std::uint8_t> anchored(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!is_wall(g(r, c))) continue;
      for (int d = 0; d < 4; ++d) {
        if (g.at_or(r + kDirDRow[d], c + kDirDCol[d], CellClass::ExteriorAir) == CellClass::ExteriorAir) {
          anchored(r, c) = 1;
        }
      }
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!is_wall(g(r, c)) || anchored(r, c)) continue;
      for (int d = 0; d < 4; ++d) {
        const int nr = r + kDirDRow[d];
        const int nc = c + kDirDCol[d];
        if (g.in_bounds(nr, nc) && anchored(nr, nc) == 1 && is_wall(g(nr, nc))) {
          anchored(r, c) = 2;
        }
      }
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (!is_wall(g(r, c)) || anchored(r, c)) continue;
        bool borders_air = false;
        for (int d = 0; d < 4; ++d) {
          const CellClass nb = g.at_or(r + kDirDRow[d], c + kDirDCol[d], CellClass::ExteriorAir);
          if (!is_wall(nb)) borders_air = true;
        }
        if (!borders_air) continue;
        if (!detail_thin::is_simple_point(g, r, c)) continue;
        g(r, c) = CellClass::InteriorAir;
        changed = true;
      }
    }
  }

  // Classify what remains: the anchored band is exterior wall.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (is_wall(g(r, c))) {
        g(r, c) = anchored(r, c) ? CellClass::ExteriorWall : CellClass::InteriorWall;
      }
    }
  }

  const int rooms_after = count_rooms(g);
  if (rooms_before != rooms_after) {
    // Locate a witness: an interior-air cell whose component label changed.
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (input(r, c) == CellClass::InteriorWall && g(r, c) == CellClass::InteriorAir) {
          fail<ValidationError>("thinning merged rooms (", rooms_before, " -> ", rooms_after,
                                "); first removed wall cell at (", r, ",", c, ")");
        }
      }
    }
    fail<ValidationError>("thinning changed room count ", rooms_before, " -> ", rooms_after);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Device placement (file-driven)

struct DevicePlacement {
  std::string id;
  DeviceType type = DeviceType::VAV;
  std::optional<Cell> anchor_cell;
  std::optional<Cell> anchor_pixel;
  std::string zone_name;  // optional explicit zone id
  json params;            // rated values, passed through to the device config
};

struct PlacementFile {
  std::vector<DevicePlacement> devices;
};

inline PlacementFile load_placement(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail<ConfigError>("placement file '", path, "' not readable");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail<ParseError>("placement '", path, "': ", e.what());
  }
  PlacementFile out;
  for (const json& dj : j.at("devices")) {
    DevicePlacement d;
    d.id = dj.at("id").get<std::string>();
    d.type = device_type_from_string(dj.at("type").get<std::string>());
    if (dj.contains("anchor_cell")) {
      d.anchor_cell = Cell{dj["anchor_cell"][0].get<int>(), dj["anchor_cell"][1].get<int>()};
    }
    if (dj.contains("anchor_pixel")) {
      d.anchor_pixel = Cell{dj["anchor_pixel"][0].get<int>(), dj["anchor_pixel"][1].get<int>()};
    }
    d.zone_name = dj.value("zone", "");
    d.params = dj;
    out.devices.push_back(std::move(d));
  }
  return out;
}

inline std::vector<MaskRect> load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail<ConfigError>("mask file '", path, "' not readable");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail<ParseError>("mask '", path, "': ", e.what());
  }
  std::vector<MaskRect> rects;
  for (const json& rj : j.at("rectangles")) {
    rects.push_back({rj[0].get<int>(), rj[1].get<int>(), rj[2].get<int>(), rj[3].get<int>()});
  }
  return rects;
}

// Flood fill the room containing `anchor` (4-connected interior air).
inline std::vector<Cell> room_cells(const Grid2D<CellClass>& g, Cell anchor) {
  if (!g.in_bounds(anchor.row, anchor.col)) {
    fail<ValidationError>("device anchor (", anchor.row, ",", anchor.col, ") outside the grid");
  }
  if (g(anchor.row, anchor.col) != CellClass::InteriorAir) {
    fail<ValidationError>("device anchor (", anchor.row, ",", anchor.col,
                          ") is not on an interior-air cell");
  }
  Grid2D<std::uint8_t> seen(g.rows(), g.cols(), 0);
  std::vector<Cell> cells;
  std::deque<Cell> queue{anchor};
  seen(anchor.row, anchor.col) = 1;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    cells.push_back(cur);
    for (int d = 0; d < 4; ++d) {
      const int nr = cur.row + kDirDRow[d];
      const int nc = cur.col + kDirDCol[d];
      if (!g.in_bounds(nr, nc) || seen(nr, nc) || g(nr, nc) != CellClass::InteriorAir) continue;
      seen(nr, nc) = 1;
      queue.push_back({nr, nc});
    }
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

struct IngestOptions {
  double threshold = 0.5;
  int denoise_iters = 2;
  double scale_m_per_pixel = 0.05;  // mandatory CLI flag
  double cv_size_m = 0.5;
  double floor_height_m = 3.0;
  std::string name = "ingested";
};

// Full pipeline: image to a validated single-floor building config.
// Device placements become zones (one per room containing a VAV anchor) and
// the room's cells become the device's diffusers.
inline BuildingConfig ingest_floorplan(const RasterImage& image, const IngestOptions& opts,
                                       const std::vector<MaskRect>& mask, const PlacementFile& placement) {
  if (opts.scale_m_per_pixel <= 0) fail<ValidationError>("scale must be > 0 m/pixel");
  if (opts.cv_size_m < opts.scale_m_per_pixel) {
    fail<ValidationError>("cv size ", opts.cv_size_m, " m is finer than the image scale ",
                          opts.scale_m_per_pixel, " m/pixel");
  }
  const int block = static_cast<int>(std::lround(opts.cv_size_m / opts.scale_m_per_pixel));

  BitGrid bits = binarize(image, opts.threshold);
  bits = erase_features(bits, mask);
  bits = denoise(bits, opts.denoise_iters);
  BitGrid coarse = downsample(bits, block);

  // Guarantee an exterior ring before the connected-components pass.
  BitGrid padded(coarse.rows() + 2, coarse.cols() + 2, 0);
  for (int r = 0; r < coarse.rows(); ++r) {
    for (int c = 0; c < coarse.cols(); ++c) padded(r + 1, c + 1) = coarse(r, c);
  }
  Grid2D<CellClass> marked = mark_exterior(padded);
  Grid2D<CellClass> thinned = thin_walls(marked);

  BuildingConfig b;
  b.name = opts.name;
  b.cv_size_m = opts.cv_size_m;
  b.floor_height_m = opts.floor_height_m;
  b.floor_grids.push_back(thinned);

  auto anchor_to_cell = [&](const DevicePlacement& d) -> Cell {
    if (d.anchor_cell) return {d.anchor_cell->row + 1, d.anchor_cell->col + 1};  // +1 for padding
    if (d.anchor_pixel) return {d.anchor_pixel->row / block + 1, d.anchor_pixel->col / block + 1};
    fail<ValidationError>("device ", d.id, " has neither anchor_cell nor anchor_pixel");
  };

  std::map<Cell, std::string> room_zone;  // room representative cell -> zone id
  int room_counter = 0;
  for (const DevicePlacement& d : placement.devices) {
    DeviceConfig dc;
    dc.id = d.id;
    dc.type = d.type;
    dc.floor = 0;
    switch (d.type) {
      case DeviceType::VAV: {
        const Cell anchor = anchor_to_cell(d);
        std::vector<Cell> cells = room_cells(thinned, anchor);
        const Cell rep = cells.front();
        auto it = room_zone.find(rep);
        if (it == room_zone.end()) {
          std::string zone_id = d.zone_name.empty() ? "room_" + std::to_string(room_counter++) : d.zone_name;
          it = room_zone.emplace(rep, zone_id).first;
          ZoneConfig z;
          z.id = zone_id;
          z.floor = 0;
          z.cells = cells;
          if (d.params.contains("heating_setpoint_c")) {
            z.setpoints.occupied.heating_c = d.params["heating_setpoint_c"].get<double>();
          }
          if (d.params.contains("cooling_setpoint_c")) {
            z.setpoints.occupied.cooling_c = d.params["cooling_setpoint_c"].get<double>();
          }
          if (d.params.contains("max_occupants")) {
            z.occupancy.max_occupants = d.params["max_occupants"].get<double>();
          }
          b.zones.push_back(std::move(z));
        } else if (!d.zone_name.empty() && d.zone_name != it->second) {
          fail<ValidationError>("devices in one room disagree on zone name: '", d.zone_name, "' vs '",
                                it->second, "'");
        }
        dc.zone_id = it->second;
        dc.diffusers = cells;
        dc.vav.min_airflow_kg_s = d.params.value("min_airflow_kg_s", 0.05);
        dc.vav.max_airflow_kg_s = d.params.value("max_airflow_kg_s", 1.0);
        dc.vav.discharge_temp_cap_c = d.params.value("discharge_temp_cap_c", 35.0);
        break;
      }
      case DeviceType::AHU:
        dc.ahu.rated_fan_power_w = d.params.value("rated_fan_power_w", 10000.0);
        dc.ahu.rated_airflow_kg_s = d.params.value("rated_airflow_kg_s", 10.0);
        dc.ahu.recirc_fraction = d.params.value("recirc_fraction", 0.7);
        break;
      case DeviceType::Boiler:
        dc.boiler.max_gas_power_w = d.params.value("max_gas_power_w", 200000.0);
        dc.boiler.rated_pump_power_w = d.params.value("rated_pump_power_w", 2000.0);
        dc.boiler.efficiency = d.params.value("efficiency", 0.85);
        break;
      case DeviceType::Chiller:
        dc.chiller.max_electrical_power_w = d.params.value("max_electrical_power_w", 100000.0);
        dc.chiller.cop = d.params.value("cop", 3.5);
        break;
      case DeviceType::Meter:
        break;
    }
    b.devices.push_back(std::move(dc));
  }
  b.validate();
  return b;
}

}  // namespace sbsim
