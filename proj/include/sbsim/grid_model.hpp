#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sbsim/core.hpp"
#include "sbsim/grid.hpp"

namespace sbsim {

// Cell classes of the floorplan lattice. Integer values are the wire format
// used in building JSON documents.
enum class CellClass : std::uint8_t {
  ExteriorAir = 0,
  InteriorAir = 1,
  InteriorWall = 2,
  ExteriorWall = 3,
};

inline bool is_exterior(CellClass c) { return c == CellClass::ExteriorAir; }
inline bool is_wall(CellClass c) { return c == CellClass::InteriorWall || c == CellClass::ExteriorWall; }

// Face/direction numbering follows the scheme used throughout the solver:
// 1 = left, 3 = right, 2 = bottom (row+1), 4 = top (row-1), stored at
// indices 0..3 in that order.
enum Dir : int { DirLeft = 0, DirBottom = 1, DirRight = 2, DirTop = 3 };
constexpr std::array<int, 4> kDirDRow = {0, 1, 0, -1};
constexpr std::array<int, 4> kDirDCol = {-1, 0, 1, 0};
constexpr std::array<int, 4> kDirOpposite = {DirRight, DirTop, DirLeft, DirBottom};

// One floor of a building: lattice of cell classes plus the CV geometry.
struct FloorplanGrid {
  int width = 0;           // columns
  int height = 0;          // rows
  Grid2D<CellClass> cells;
  double cv_size_m = 0.5;       // horizontal CV dimension Δx
  double floor_height_m = 3.0;  // z

  CellClass at(int r, int c) const { return cells.at_or(r, c, CellClass::ExteriorAir); }

  void validate() const {
    if (width <= 0 || height <= 0 || cells.rows() != height || cells.cols() != width) {
      fail<ValidationError>("floorplan grid has inconsistent shape");
    }
    if (cv_size_m <= 0) fail<ValidationError>("cv_size_m must be > 0");
    if (floor_height_m <= 0) fail<ValidationError>("floor_height_m must be > 0");
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const bool border = r == 0 || c == 0 || r == height - 1 || c == width - 1;
        if (border && cells(r, c) != CellClass::ExteriorAir) {
          fail<ValidationError>("lattice border cell (", r, ",", c, ") is not exterior air");
        }
        if (cells(r, c) == CellClass::InteriorAir) {
          bool connected = false;
          for (int d = 0; d < 4; ++d) {
            if (!is_exterior(at(r + kDirDRow[d], c + kDirDCol[d]))) connected = true;
          }
          if (!connected) {
            fail<ValidationError>("isolated interior-air cell at (", r, ",", c, ")");
          }
        }
      }
    }
  }
};

// Pads the lattice with a ring of exterior air so the border invariant holds.
inline FloorplanGrid pad_with_exterior(const FloorplanGrid& g, int ring = 1) {
  FloorplanGrid out = g;
  out.width = g.width + 2 * ring;
  out.height = g.height + 2 * ring;
  out.cells = Grid2D<CellClass>(out.height, out.width, CellClass::ExteriorAir);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) out.cells(r + ring, c + ring) = g.cells(r, c);
  }
  return out;
}

// CV roles for the solver. Boundary CVs carry convection terms and reduced
// volume; the exterior-side bitmask records which faces touch exterior air.
enum class CvKind : std::uint8_t { Exterior, Interior, BoundaryEdge, BoundaryCorner, BoundaryOther };

struct CVClassification {
  Grid2D<CvKind> kind;
  Grid2D<std::uint8_t> exterior_sides;  // bit d set iff d-neighbor is exterior air

  bool is_boundary(int r, int c) const {
    const CvKind k = kind(r, c);
    return k == CvKind::BoundaryEdge || k == CvKind::BoundaryCorner || k == CvKind::BoundaryOther;
  }
};

inline CVClassification classify_cvs(const FloorplanGrid& grid) {
  CVClassification out;
  out.kind = Grid2D<CvKind>(grid.height, grid.width, CvKind::Exterior);
  out.exterior_sides = Grid2D<std::uint8_t>(grid.height, grid.width, 0);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (is_exterior(grid.cells(r, c))) continue;
      std::uint8_t mask = 0;
      for (int d = 0; d < 4; ++d) {
        if (is_exterior(grid.at(r + kDirDRow[d], c + kDirDCol[d]))) mask |= std::uint8_t(1u << d);
      }
      out.exterior_sides(r, c) = mask;
      const int n = __builtin_popcount(mask);
      if (n == 0) {
        out.kind(r, c) = CvKind::Interior;
      } else if (n == 1) {
        out.kind(r, c) = CvKind::BoundaryEdge;
      } else if (n == 2) {
        const bool horizontal_pair = mask == ((1u << DirLeft) | (1u << DirRight));
        const bool vertical_pair = mask == ((1u << DirBottom) | (1u << DirTop));
        out.kind(r, c) = (horizontal_pair || vertical_pair) ? CvKind::BoundaryOther : CvKind::BoundaryCorner;
      } else {
        out.kind(r, c) = CvKind::BoundaryOther;
      }
    }
  }
  return out;
}

// The nine tunable physical constants (plus fixed interior-air properties).
struct MaterialParams {
  double convection_coefficient = 357.0;          // W/m^2/K, exterior faces
  double exterior_cv_conductivity = 0.83;         // W/m/K
  double exterior_cv_density = 2359.0;            // kg/m^3
  double exterior_cv_heat_capacity = 2499.0;      // J/kg/K
  double interior_wall_cv_conductivity = 5.0;     // W/m/K
  double interior_wall_cv_density = 1500.0;       // kg/m^3
  double interior_wall_cv_heat_capacity = 1499.0; // J/kg/K
  double swap_prob = 0.0;
  double swap_radius = 0.0;                       // CV count, integer-valued

  // Interior air is not tuned; standard air properties.
  static constexpr double kAirConductivity = 0.026;  // W/m/K
  static constexpr double kAirDensity = 1.2;         // kg/m^3
  static constexpr double kAirHeatCapacity = 1006.0; // J/kg/K

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0)) fail<ValidationError>("material parameter ", name, " must be >= 0, got ", v);
    };
    check(convection_coefficient, "convection_coefficient");
    check(exterior_cv_conductivity, "exterior_cv_conductivity");
    check(exterior_cv_density, "exterior_cv_density");
    check(exterior_cv_heat_capacity, "exterior_cv_heat_capacity");
    check(interior_wall_cv_conductivity, "interior_wall_cv_conductivity");
    check(interior_wall_cv_density, "interior_wall_cv_density");
    check(interior_wall_cv_heat_capacity, "interior_wall_cv_heat_capacity");
    check(swap_prob, "swap_prob");
    check(swap_radius, "swap_radius");
    if (swap_prob > 1.0) fail<ValidationError>("swap_prob must be <= 1, got ", swap_prob);
  }

  double conductivity_for(CellClass c) const {
    switch (c) {
      case CellClass::InteriorAir: return kAirConductivity;
      case CellClass::InteriorWall: return interior_wall_cv_conductivity;
      case CellClass::ExteriorWall: return exterior_cv_conductivity;
      case CellClass::ExteriorAir: return 0.0;
    }
    return 0.0;
  }
  double density_for(CellClass c) const {
    switch (c) {
      case CellClass::InteriorAir: return kAirDensity;
      case CellClass::InteriorWall: return interior_wall_cv_density;
      case CellClass::ExteriorWall: return exterior_cv_density;
      case CellClass::ExteriorAir: return kAirDensity;
    }
    return 0.0;
  }
  double heat_capacity_for(CellClass c) const {
    switch (c) {
      case CellClass::InteriorAir: return kAirHeatCapacity;
      case CellClass::InteriorWall: return interior_wall_cv_heat_capacity;
      case CellClass::ExteriorWall: return exterior_cv_heat_capacity;
      case CellClass::ExteriorAir: return kAirHeatCapacity;
    }
    return 0.0;
  }
};

// Oriented field tensors consumed by the FD engine. K_d carries the cell's
// conductivity where both the cell and its d-neighbor are non-exterior;
// H_d carries the convection coefficient across exterior-facing faces;
// U/V are the CV widths/heights (boundary CVs are halved); C and P are the
// per-cell heat capacity and density fields.
struct OrientedFields {
  int rows = 0;
  int cols = 0;
  double dx = 0.0;
  double z = 0.0;
  std::array<Grid2D<double>, 4> K;  // indexed by Dir
  std::array<Grid2D<double>, 4> H;
  Grid2D<double> U;
  Grid2D<double> V;
  Grid2D<double> C;
  Grid2D<double> P;
  Grid2D<std::uint8_t> exterior;      // 1 = exterior air cell
  Grid2D<std::uint8_t> interior_air;  // 1 = well-mixed interior air cell

  double cell_volume(int r, int c) const { return U(r, c) * V(r, c) * z; }
};

inline OrientedFields build_oriented_fields(const FloorplanGrid& grid, const CVClassification& cls,
                                            const MaterialParams& params) {
  params.validate();
  OrientedFields f;
  f.rows = grid.height;
  f.cols = grid.width;
  f.dx = grid.cv_size_m;
  f.z = grid.floor_height_m;
  for (int d = 0; d < 4; ++d) {
    f.K[d] = Grid2D<double>(f.rows, f.cols, 0.0);
    f.H[d] = Grid2D<double>(f.rows, f.cols, 0.0);
  }
  f.U = Grid2D<double>(f.rows, f.cols, f.dx);
  f.V = Grid2D<double>(f.rows, f.cols, f.dx);
  f.C = Grid2D<double>(f.rows, f.cols, 0.0);
  f.P = Grid2D<double>(f.rows, f.cols, 0.0);
  f.exterior = Grid2D<std::uint8_t>(f.rows, f.cols, 0);
  f.interior_air = Grid2D<std::uint8_t>(f.rows, f.cols, 0);

  for (int r = 0; r < f.rows; ++r) {
    for (int c = 0; c < f.cols; ++c) {
      const CellClass cell = grid.cells(r, c);
      f.C(r, c) = params.heat_capacity_for(cell);
      f.P(r, c) = params.density_for(cell);
      if (cell == CellClass::InteriorAir) f.interior_air(r, c) = 1;
      if (is_exterior(cell)) {
        f.exterior(r, c) = 1;
        continue;
      }
      const double k_here = params.conductivity_for(cell);
      const std::uint8_t ext_mask = cls.exterior_sides(r, c);
      for (int d = 0; d < 4; ++d) {
        const CellClass nb = grid.at(r + kDirDRow[d], c + kDirDCol[d]);
        if (!is_exterior(nb)) {
          f.K[d](r, c) = k_here;
        } else if (ext_mask != 0) {
          f.H[d](r, c) = params.convection_coefficient;
        }
      }
      // Eqs. for the CV extents: u is halved when a vertical-direction
      // neighbor is exterior (top/bottom edges and corners), v when a
      // horizontal-direction neighbor is.
      const bool halve_u = (ext_mask & ((1u << DirTop) | (1u << DirBottom))) != 0;
      const bool halve_v = (ext_mask & ((1u << DirLeft) | (1u << DirRight))) != 0;
      if (halve_u) f.U(r, c) = f.dx / 2.0;
      if (halve_v) f.V(r, c) = f.dx / 2.0;
    }
  }
  return f;
}

// Zone/device wiring. Cells carry a floor index so multi-floor buildings can
// share one layout object.
struct FloorCell {
  int floor = 0;
  Cell cell;
  friend bool operator==(const FloorCell& a, const FloorCell& b) {
    return a.floor == b.floor && a.cell == b.cell;
  }
  friend bool operator<(const FloorCell& a, const FloorCell& b) {
    if (a.floor != b.floor) return a.floor < b.floor;
    return a.cell < b.cell;
  }
};

struct ZoneInfo {
  std::string id;
  int floor = 0;
  std::vector<Cell> cells;
  double area_m2 = 0.0;
  double heating_setpoint_c = 20.0;
  double cooling_setpoint_c = 24.0;
  std::vector<std::string> device_ids;
};

class ZoneMap {
 public:
  ZoneMap() = default;

  // zone_grids[floor](r, c) = zone index or -1.
  ZoneMap(std::vector<ZoneInfo> zones, int num_floors, const std::vector<Grid2D<CellClass>>& floor_cells)
      : zones_(std::move(zones)) {
    zone_grids_.reserve(num_floors);
    for (int fl = 0; fl < num_floors; ++fl) {
      zone_grids_.emplace_back(floor_cells[fl].rows(), floor_cells[fl].cols(), -1);
    }
    for (int zi = 0; zi < static_cast<int>(zones_.size()); ++zi) {
      ZoneInfo& z = zones_[zi];
      if (z.floor < 0 || z.floor >= num_floors) fail<ValidationError>("zone ", z.id, ": bad floor index");
      for (const Cell& cell : z.cells) {
        Grid2D<int>& zg = zone_grids_[z.floor];
        if (!zg.in_bounds(cell.row, cell.col)) {
          fail<ValidationError>("zone ", z.id, ": cell out of bounds (", cell.row, ",", cell.col, ")");
        }
        if (zg(cell.row, cell.col) != -1) {
          fail<ValidationError>("zone ", z.id, ": cell (", cell.row, ",", cell.col,
                                ") already belongs to zone ", zones_[zg(cell.row, cell.col)].id);
        }
        if (floor_cells[z.floor](cell.row, cell.col) != CellClass::InteriorAir) {
          fail<ValidationError>("zone ", z.id, ": cell (", cell.row, ",", cell.col, ") is not interior air");
        }
        zg(cell.row, cell.col) = zi;
      }
    }
  }

  const std::vector<ZoneInfo>& zones() const { return zones_; }
  std::vector<ZoneInfo>& zones() { return zones_; }
  int zone_index_at(int floor, int r, int c) const { return zone_grids_[floor](r, c); }
  const Grid2D<int>& zone_grid(int floor) const { return zone_grids_[floor]; }

  int index_of(const std::string& id) const {
    for (int i = 0; i < static_cast<int>(zones_.size()); ++i) {
      if (zones_[i].id == id) return i;
    }
    return -1;
  }

 private:
  std::vector<ZoneInfo> zones_;
  std::vector<Grid2D<int>> zone_grids_;
};

enum class DeviceType { VAV, AHU, Boiler, Chiller, Meter };

inline std::string to_string(DeviceType t) {
  switch (t) {
    case DeviceType::VAV: return "VAV";
    case DeviceType::AHU: return "AHU";
    case DeviceType::Boiler: return "Boiler";
    case DeviceType::Chiller: return "Chiller";
    case DeviceType::Meter: return "Meter";
  }
  return "?";
}

inline DeviceType device_type_from_string(const std::string& s) {
  if (s == "VAV") return DeviceType::VAV;
  if (s == "AHU") return DeviceType::AHU;
  if (s == "Boiler") return DeviceType::Boiler;
  if (s == "Chiller") return DeviceType::Chiller;
  if (s == "Meter") return DeviceType::Meter;
  fail<ConfigError>("unknown device type '", s, "'");
}

struct DeviceInfo {
  std::string id;
  DeviceType type = DeviceType::VAV;
  std::string zone_id;                // VAVs only
  std::vector<FloorCell> diffusers;   // VAVs only
  std::vector<std::string> observable_fields;
  std::vector<std::string> action_fields;
  std::map<std::string, double> max_power_w;
};

class DeviceLayout {
 public:
  DeviceLayout() = default;
  explicit DeviceLayout(std::vector<DeviceInfo> devices) : devices_(std::move(devices)) {
    std::set<std::string> ids;
    std::set<std::string> action_names;
    for (const DeviceInfo& d : devices_) {
      if (!ids.insert(d.id).second) fail<ValidationError>("duplicate device id '", d.id, "'");
      for (const std::string& a : d.action_fields) {
        if (!action_names.insert(a).second) {
          fail<ValidationError>("action field '", a, "' is not unique building-wide");
        }
      }
    }
  }

  const std::vector<DeviceInfo>& devices() const { return devices_; }

  const DeviceInfo* find(const std::string& id) const {
    for (const DeviceInfo& d : devices_) {
      if (d.id == id) return &d;
    }
    return nullptr;
  }

  std::vector<const DeviceInfo*> of_type(DeviceType t) const {
    std::vector<const DeviceInfo*> out;
    for (const DeviceInfo& d : devices_) {
      if (d.type == t) out.push_back(&d);
    }
    return out;
  }

  void validate_against(const std::vector<Grid2D<CellClass>>& floors) const {
    for (const DeviceInfo& d : devices_) {
      for (const FloorCell& fc : d.diffusers) {
        if (fc.floor < 0 || fc.floor >= static_cast<int>(floors.size()) ||
            !floors[fc.floor].in_bounds(fc.cell.row, fc.cell.col)) {
          fail<ValidationError>("device ", d.id, ": diffuser cell out of bounds");
        }
        if (floors[fc.floor](fc.cell.row, fc.cell.col) != CellClass::InteriorAir) {
          fail<ValidationError>("device ", d.id, ": diffuser cell (", fc.cell.row, ",", fc.cell.col,
                                ") is not interior air");
        }
      }
    }
  }

 private:
  std::vector<DeviceInfo> devices_;
};

}  // namespace sbsim
