#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbsim/core.hpp"
#include "sbsim/grid.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

enum class ShiftDir { Left, Right, Up, Down };

// Slides the array one step in the given direction; vacated positions are
// filled with `fill`. shift(T, Left)[i][j] == T[i][j+1].
template <typename T>
Grid2D<T> shift(const Grid2D<T>& g, ShiftDir dir, T fill = T{}) {
  Grid2D<T> out(g.rows(), g.cols(), fill);
  int dr = 0, dc = 0;
  switch (dir) {
    case ShiftDir::Left: dc = 1; break;
    case ShiftDir::Right: dc = -1; break;
    case ShiftDir::Up: dr = 1; break;
    case ShiftDir::Down: dr = -1; break;
  }
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      const int sr = r + dr;
      const int sc = c + dc;
      if (g.in_bounds(sr, sc)) out(r, c) = g(sr, sc);
    }
  }
  return out;
}

struct ThermalState {
  Grid2D<double> temperature;       // T, °C
  Grid2D<double> temperature_prev;  // T at the previous committed timestep
  UnixTime time = 0;
  Rng rng;

  static ThermalState uniform(int rows, int cols, double t0, UnixTime start = 0, std::uint64_t seed = 0) {
    ThermalState s;
    s.temperature = Grid2D<double>(rows, cols, t0);
    s.temperature_prev = s.temperature;
    s.time = start;
    s.rng = Rng(seed);
    return s;
  }
};

struct BoundaryConditions {
  double outside_temp_c = 10.0;            // T∞
  std::optional<double> h_override;        // replaces the convection coefficient when set
  double dt_s = 300.0;

  void validate() const {
    if (!(dt_s > 0)) fail<ValidationError>("timestep must be > 0 s");
  }
};

struct ExternalEnergyField {
  Grid2D<double> joules;  // per timestep per cell; nonzero only on diffuser cells
};

// Precomputed per-cell coefficients of the tensorized update, in Watt form.
// Conduction uses symmetric per-face conductances so that the flux a cell
// sends across a face is exactly what its neighbor receives; convection and
// capacity terms follow the oriented tensors directly.
class FdCoefficients {
 public:
  FdCoefficients(const OrientedFields& f, const BoundaryConditions& bc) : rows_(f.rows), cols_(f.cols) {
    bc.validate();
    const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
    for (auto& g : G_) g.assign(n, 0.0);
    hsum_.assign(n, 0.0);
    cap_.assign(n, 0.0);
    inv_diag_.assign(n, 0.0);
    exterior_.assign(n, 0);

    const double z = f.z;
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        const std::size_t i = idx(r, c);
        if (f.exterior(r, c)) {
          exterior_[i] = 1;
          continue;
        }
        if (r == 0 || c == 0 || r == rows_ - 1 || c == cols_ - 1) {
          fail<ValidationError>("non-exterior cell (", r, ",", c, ") on the lattice border");
        }
        cap_[i] = f.C(r, c) * f.P(r, c) * f.U(r, c) * f.V(r, c) * z / bc.dt_s;
        double diag = cap_[i];
        for (int d = 0; d < 4; ++d) {
          const int nr = r + kDirDRow[d];
          const int nc = c + kDirDCol[d];
          const double k_here = f.K[d](r, c);
          if (k_here > 0.0) {
            const double k_there = f.K[kDirOpposite[d]](nr, nc);
            double g = 0.0;
            if (k_there > 0.0) {
              // Horizontal faces: shared extent min(V), path lengths U/2;
              // vertical faces the transpose. A well-mixed interior-air cell
              // contributes no bulk resistance against a solid neighbor, so
              // the face conductance at air/wall interfaces is governed by
              // the wall's (tunable) conductivity.
              const bool horizontal = d == DirLeft || d == DirRight;
              const double extent = horizontal ? std::min(f.V(r, c), f.V(nr, nc))
                                               : std::min(f.U(r, c), f.U(nr, nc));
              const double span_here = horizontal ? f.U(r, c) : f.V(r, c);
              const double span_there = horizontal ? f.U(nr, nc) : f.V(nr, nc);
              const bool air_here = f.interior_air(r, c) != 0;
              const bool air_there = f.interior_air(nr, nc) != 0;
              double path = 0.0;
              if (!air_here || air_here == air_there) path += span_here / (2.0 * k_here);
              if (!air_there || air_here == air_there) path += span_there / (2.0 * k_there);
              g = z * extent / path;
            }
            G_[d][i] = g;
            diag += g;
          }
          double h = f.H[d](r, c);
          if (h > 0.0 && bc.h_override) h = *bc.h_override;
          if (h > 0.0) {
            const bool horizontal = d == DirLeft || d == DirRight;
            const double area = (horizontal ? f.V(r, c) : f.U(r, c)) * z;
            hsum_[i] += h * area;
          }
        }
        diag += hsum_[i];
        if (!(diag > 0.0)) fail<ValidationError>("degenerate FD cell at (", r, ",", c, "): zero diagonal");
        inv_diag_[i] = 1.0 / diag;
      }
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }
  bool exterior(std::size_t i) const { return exterior_[i] != 0; }
  double capacity_w_per_k(std::size_t i) const { return cap_[i]; }
  double convection_w_per_k(std::size_t i) const { return hsum_[i]; }

  // One Jacobi sweep in residual form: the cell moves by the energy-balance
  // residual over the diagonal, so a uniform equilibrium is preserved
  // bit-exactly. `power` holds Qx/dt per cell; `t_prev` is the committed
  // state of the previous timestep. Returns max |T_out - T_in| over
  // non-exterior cells.
  double sweep(const std::vector<double>& power, const Grid2D<double>& t_prev,
               const Grid2D<double>& t_in, double outside_temp, Grid2D<double>& t_out) const {
    double max_delta = 0.0;
    const double* tp = t_prev.data();
    const double* tin = t_in.data();
    double* tout = t_out.data();
    const int w = cols_;
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        if (exterior_[i]) {
          tout[i] = outside_temp;
          continue;
        }
        const double t = tin[i];
        double residual = power[i];
        residual += G_[DirLeft][i] * (tin[i - 1] - t);
        residual += G_[DirRight][i] * (tin[i + 1] - t);
        residual += G_[DirTop][i] * (tin[i - w] - t);
        residual += G_[DirBottom][i] * (tin[i + w] - t);
        residual += hsum_[i] * (outside_temp - t);
        residual += cap_[i] * (tp[i] - t);
        const double d = residual * inv_diag_[i];
        const double v = t + d;
        if (!std::isfinite(v)) {
          fail<SolverError>("solver divergence: non-finite temperature at cell (", r, ",", c, ")");
        }
        tout[i] = v;
        const double ad = std::abs(d);
        if (ad > max_delta) max_delta = ad;
      }
    }
    return max_delta;
  }

  void make_power(const Grid2D<double>& qx_joules, double dt_s, std::vector<double>& power) const {
    const std::size_t n = cap_.size();
    power.resize(n);
    for (std::size_t i = 0; i < n; ++i) power[i] = qx_joules[i] / dt_s;
  }

 private:
  int rows_, cols_;
  std::array<std::vector<double>, 4> G_;
  std::vector<double> hsum_;
  std::vector<double> cap_;
  std::vector<double> inv_diag_;
  std::vector<std::uint8_t> exterior_;
};

inline constexpr double kDefaultEpsilonC = 0.01;
inline constexpr int kDefaultMaxSweeps = 10000;

// Single sweep of the tensorized update; convenience entry that builds the
// coefficients on the fly. Returns (T_new, max_delta).
inline std::pair<Grid2D<double>, double> fd_sweep(const ThermalState& state, const OrientedFields& fields,
                                                  const BoundaryConditions& bc,
                                                  const ExternalEnergyField& qx) {
  if (!state.temperature.same_shape(qx.joules)) fail<ValidationError>("fd_sweep: shape mismatch");
  FdCoefficients coeffs(fields, bc);
  std::vector<double> power;
  coeffs.make_power(qx.joules, bc.dt_s, power);
  Grid2D<double> out(state.temperature.rows(), state.temperature.cols());
  const double delta =
      coeffs.sweep(power, state.temperature_prev, state.temperature, bc.outside_temp_c, out);
  return {std::move(out), delta};
}

struct FdStepStats {
  int sweeps = 0;
  double final_delta = 0.0;
};

// Iterates sweeps to convergence and commits the step using prebuilt
// coefficients (the fast path used by the simulator).
inline FdStepStats fd_step_with(const FdCoefficients& coeffs, ThermalState& state,
                                const BoundaryConditions& bc, const ExternalEnergyField& qx,
                                double epsilon = kDefaultEpsilonC, int max_sweeps = kDefaultMaxSweeps) {
  if (!(epsilon > 0)) fail<ValidationError>("fd_step: epsilon must be > 0");
  if (!state.temperature.same_shape(qx.joules)) fail<ValidationError>("fd_step: shape mismatch");
  std::vector<double> power;
  coeffs.make_power(qx.joules, bc.dt_s, power);

  Grid2D<double>& t = state.temperature;
  // Pin exterior cells before the first sweep so neighbor reads see T∞.
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (coeffs.exterior(i)) t[i] = bc.outside_temp_c;
  }
  const Grid2D<double>& committed = state.temperature_prev;  // T⁻ for the capacity term
  Grid2D<double> scratch(t.rows(), t.cols());

  FdStepStats stats;
  Grid2D<double>* cur = &t;
  Grid2D<double>* next = &scratch;
  while (true) {
    const double delta = coeffs.sweep(power, committed, *cur, bc.outside_temp_c, *next);
    std::swap(cur, next);
    ++stats.sweeps;
    stats.final_delta = delta;
    if (delta <= epsilon) break;
    if (stats.sweeps >= max_sweeps) {
      fail<SolverError>("fd_step failed to converge after ", max_sweeps,
                        " sweeps; max_delta = ", delta, " °C");
    }
  }
  if (cur != &t) t = *cur;
  state.temperature_prev = t;
  state.time += static_cast<UnixTime>(bc.dt_s);
  return stats;
}

inline FdStepStats fd_step(ThermalState& state, const OrientedFields& fields, const BoundaryConditions& bc,
                           const ExternalEnergyField& qx, double epsilon = kDefaultEpsilonC,
                           int max_sweeps = kDefaultMaxSweeps) {
  FdCoefficients coeffs(fields, bc);
  return fd_step_with(coeffs, state, bc, qx, epsilon, max_sweeps);
}

// Randomized intra-zone air mixing: each zoned interior-air cell swaps its
// temperature, with probability swap_prob, with a uniformly chosen
// interior-air cell of the same zone within Chebyshev distance swap_radius.
inline void air_shuffle(Grid2D<double>& temperature, const Grid2D<CellClass>& cells,
                        const Grid2D<int>& zone_grid, double swap_prob, int swap_radius, Rng& rng) {
  if (swap_prob < 0.0 || swap_prob > 1.0) fail<ValidationError>("swap_prob must be in [0,1]");
  if (swap_radius < 0) fail<ValidationError>("swap_radius must be >= 0");
  if (swap_prob == 0.0 || swap_radius == 0) return;
  const int rows = temperature.rows();
  const int cols = temperature.cols();
  std::vector<Cell> candidates;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (cells(r, c) != CellClass::InteriorAir) continue;
      const int zone = zone_grid(r, c);
      if (zone < 0) continue;
      if (!rng.bernoulli(swap_prob)) continue;

      int pr = -1, pc = -1;
      // Rejection sampling over the Chebyshev box keeps the choice uniform
      // over the candidate set; fall back to enumeration for cramped zones.
      for (int attempt = 0; attempt < 32; ++attempt) {
        const int tr = r + static_cast<int>(rng.uniform_int(-swap_radius, swap_radius));
        const int tc = c + static_cast<int>(rng.uniform_int(-swap_radius, swap_radius));
        if (!temperature.in_bounds(tr, tc)) continue;
        if (cells(tr, tc) != CellClass::InteriorAir) continue;
        if (zone_grid(tr, tc) != zone) continue;
        pr = tr;
        pc = tc;
        break;
      }
      if (pr < 0) {
        candidates.clear();
        for (int tr = std::max(0, r - swap_radius); tr <= std::min(rows - 1, r + swap_radius); ++tr) {
          for (int tc = std::max(0, c - swap_radius); tc <= std::min(cols - 1, c + swap_radius); ++tc) {
            if (cells(tr, tc) == CellClass::InteriorAir && zone_grid(tr, tc) == zone) {
              candidates.push_back({tr, tc});
            }
          }
        }
        const Cell pick = candidates[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
        pr = pick.row;
        pc = pick.col;
      }
      std::swap(temperature(r, c), temperature(pr, pc));
    }
  }
}

// Splits each device's thermal energy equally over its diffuser cells.
// Returns one field per floor.
inline std::vector<ExternalEnergyField> apply_diffuser_energy(
    const std::map<std::string, double>& joules_per_device, const DeviceLayout& layout,
    const std::vector<std::pair<int, int>>& floor_shapes) {
  std::vector<ExternalEnergyField> fields(floor_shapes.size());
  for (std::size_t fl = 0; fl < floor_shapes.size(); ++fl) {
    fields[fl].joules = Grid2D<double>(floor_shapes[fl].first, floor_shapes[fl].second, 0.0);
  }
  for (const auto& [device_id, q] : joules_per_device) {
    if (q == 0.0) continue;
    const DeviceInfo* dev = layout.find(device_id);
    if (dev == nullptr) fail<ConfigError>("unknown device '", device_id, "' in energy map");
    if (dev->diffusers.empty()) {
      fail<ConfigError>("device '", device_id, "' delivers ", q, " J but has no diffuser cells");
    }
    const double share = q / static_cast<double>(dev->diffusers.size());
    for (const FloorCell& fc : dev->diffusers) {
      fields[fc.floor].joules(fc.cell.row, fc.cell.col) += share;
    }
  }
  return fields;
}

// Debug/render snapshot: row-major CSV, six decimal places.
inline void write_temperature_csv(const Grid2D<double>& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail<ConfigError>("cannot open '", path, "' for writing");
  char buf[32];
  for (int r = 0; r < t.rows(); ++r) {
    for (int c = 0; c < t.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", t(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace sbsim
