#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/fd_engine.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/hvac.hpp"

namespace sbsim {

struct SimStepInfo {
  PlantResult plant;
  int fd_sweeps = 0;
  double max_delta_c = 0.0;
};

// One building instance: per-floor thermal state plus the HVAC plant.
// Single-owner mutable; run independent instances for parallel work.
class Simulator {
 public:
  Simulator(const BuildingConfig& config, std::uint64_t seed)
      : config_(config),
        zone_map_(config.zone_map()),
        layout_(config.device_layout()),
        plant_config_(config.plant_config()),
        vav_zone_(config.vav_zone_map()),
        shuffle_rng_(derive_seed(seed, "air_shuffle")) {
    config_.validate();
    bc_.dt_s = config_.timestep_s;
    for (int fl = 0; fl < config_.num_floors(); ++fl) {
      FloorplanGrid plan = config_.floorplan(fl);
      const CVClassification cls = classify_cvs(plan);
      floors_.push_back(Floor{plan, build_oriented_fields(plan, cls, config_.materials), nullptr, {}});
      floor_shapes_.emplace_back(plan.height, plan.width);
    }
    reset(config_.environment.initial_temp_c, 0);
  }

  void reset(double initial_temp_c, UnixTime start_time) {
    for (std::size_t fl = 0; fl < floors_.size(); ++fl) {
      Floor& f = floors_[fl];
      f.state = ThermalState::uniform(f.plan.height, f.plan.width, initial_temp_c, start_time);
      f.coeffs.reset();  // rebuilt lazily; bc timestep is fixed per config
    }
  }

  // Overrides the per-CV temperatures (replay initialization).
  void set_temperatures(const std::vector<Grid2D<double>>& per_floor, UnixTime start_time) {
    for (std::size_t fl = 0; fl < floors_.size(); ++fl) {
      if (!per_floor[fl].same_shape(floors_[fl].state.temperature)) {
        fail<ValidationError>("set_temperatures: shape mismatch on floor ", fl);
      }
      floors_[fl].state.temperature = per_floor[fl];
      floors_[fl].state.temperature_prev = per_floor[fl];
      floors_[fl].state.time = start_time;
    }
  }

  void seed_shuffle(std::uint64_t seed) { shuffle_rng_ = Rng(seed); }

  std::map<std::string, double> zone_mean_temps() const {
    std::map<std::string, double> out;
    for (const ZoneInfo& z : zone_map_.zones()) {
      const Grid2D<double>& t = floors_[z.floor].state.temperature;
      double sum = 0.0;
      for (const Cell& c : z.cells) sum += t(c.row, c.col);
      out[z.id] = z.cells.empty() ? 0.0 : sum / static_cast<double>(z.cells.size());
    }
    return out;
  }

  // Advances one timestep: plant -> diffuser energy -> FD -> air shuffle.
  // `setpoint_override` replaces the scheduled zone setpoints when given
  // (occupant-feedback nudges and similar).
  SimStepInfo step(const SetpointVector& action, double outside_temp_c,
                   double epsilon = kDefaultEpsilonC,
                   const std::map<std::string, ZoneSetpoints>* setpoint_override = nullptr) {
    SimStepInfo info;
    std::map<std::string, double> joules;
    if (config_.has_plant()) {
      info.plant = plant_step(zone_mean_temps(),
                              setpoint_override ? *setpoint_override : zone_setpoints(time()),
                              vav_zone_, action, outside_temp_c, plant_config_);
      for (const auto& [dev, q_w] : info.plant.device_thermal_w) {
        joules[dev] = q_w * config_.timestep_s;
      }
    }
    std::vector<ExternalEnergyField> qx = apply_diffuser_energy(joules, layout_, floor_shapes_);

    bc_.outside_temp_c = outside_temp_c;
    for (std::size_t fl = 0; fl < floors_.size(); ++fl) {
      Floor& f = floors_[fl];
      if (!f.coeffs) f.coeffs = std::make_unique<FdCoefficients>(f.fields, bc_);
      const FdStepStats stats = fd_step_with(*f.coeffs, f.state, bc_, qx[fl], epsilon);
      info.fd_sweeps += stats.sweeps;
      info.max_delta_c = std::max(info.max_delta_c, stats.final_delta);
      air_shuffle(f.state.temperature, f.plan.cells, zone_map_.zone_grid(static_cast<int>(fl)),
                  config_.materials.swap_prob, static_cast<int>(config_.materials.swap_radius),
                  shuffle_rng_);
      // The shuffled field is the committed state of the step.
      f.state.temperature_prev = f.state.temperature;
    }
    return info;
  }

  std::map<std::string, ZoneSetpoints> zone_setpoints(UnixTime t) const {
    std::map<std::string, ZoneSetpoints> out;
    for (const ZoneConfig& z : config_.zones) out[z.id] = z.setpoints.at(t);
    return out;
  }

  const BuildingConfig& config() const { return config_; }
  const ZoneMap& zone_map() const { return zone_map_; }
  const DeviceLayout& layout() const { return layout_; }
  const Grid2D<double>& temperatures(int floor) const { return floors_[floor].state.temperature; }
  const FloorplanGrid& floorplan(int floor) const { return floors_[floor].plan; }
  UnixTime time() const { return floors_.empty() ? 0 : floors_[0].state.time; }

 private:
  struct Floor {
    FloorplanGrid plan;
    OrientedFields fields;
    std::unique_ptr<FdCoefficients> coeffs;
    ThermalState state;
  };

  BuildingConfig config_;
  ZoneMap zone_map_;
  DeviceLayout layout_;
  PlantConfig plant_config_;
  std::map<std::string, std::string> vav_zone_;
  BoundaryConditions bc_;
  std::vector<Floor> floors_;
  std::vector<std::pair<int, int>> floor_shapes_;
  Rng shuffle_rng_;
};

}  // namespace sbsim
