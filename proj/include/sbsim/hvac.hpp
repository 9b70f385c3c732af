#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sbsim/core.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

constexpr double kAirSpecificHeat = 1006.0;  // J/kg/K
constexpr double kAirDensity = 1.2;          // kg/m^3
constexpr double kM3sToCfm = 2118.88;

// Agent action: the two supply-temperature setpoints.
struct SetpointVector {
  double supply_water_temp_c = 60.0;  // T̂_b
  double supply_air_temp_c = 15.0;    // T̂_s
};

struct ActionBounds {
  double supply_water_min_c = 30.0;
  double supply_water_max_c = 90.0;
  double supply_air_min_c = 10.0;
  double supply_air_max_c = 20.0;

  bool contains(const SetpointVector& a) const {
    return a.supply_water_temp_c >= supply_water_min_c && a.supply_water_temp_c <= supply_water_max_c &&
           a.supply_air_temp_c >= supply_air_min_c && a.supply_air_temp_c <= supply_air_max_c;
  }
  SetpointVector clamp(const SetpointVector& a) const {
    return {std::clamp(a.supply_water_temp_c, supply_water_min_c, supply_water_max_c),
            std::clamp(a.supply_air_temp_c, supply_air_min_c, supply_air_max_c)};
  }
};

struct ZoneSetpoints {
  double heating_c = 20.0;
  double cooling_c = 24.0;

  void validate() const {
    if (!(heating_c < cooling_c)) {
      fail<ValidationError>("heating setpoint (", heating_c, ") must be below cooling setpoint (", cooling_c, ")");
    }
  }
};

// Occupied/unoccupied setpoint bands on a daily schedule; weekends can run
// the unoccupied band all day.
struct ZoneSetpointSchedule {
  ZoneSetpoints occupied{20.0, 24.0};
  ZoneSetpoints unoccupied{20.0, 24.0};
  int occupied_start_s = 7 * 3600;
  int occupied_end_s = 18 * 3600;
  bool weekends_unoccupied = true;

  void validate() const {
    occupied.validate();
    unoccupied.validate();
    if (occupied_start_s >= occupied_end_s) fail<ValidationError>("occupied window must be non-empty");
  }

  ZoneSetpoints at(UnixTime t) const {
    if (weekends_unoccupied && is_weekend(t)) return unoccupied;
    const int sod = seconds_of_day(t);
    return (sod >= occupied_start_s && sod < occupied_end_s) ? occupied : unoccupied;
  }
};

struct VavConfig {
  double min_airflow_kg_s = 0.05;
  double max_airflow_kg_s = 1.0;
  double discharge_temp_cap_c = 35.0;
  double proportional_band_c = 2.0;

  void validate() const {
    if (min_airflow_kg_s < 0 || max_airflow_kg_s < min_airflow_kg_s) {
      fail<ValidationError>("VAV airflow bounds invalid: min ", min_airflow_kg_s, " max ", max_airflow_kg_s);
    }
    if (proportional_band_c <= 0) fail<ValidationError>("VAV proportional band must be > 0");
  }
};

struct VavResult {
  double airflow_kg_s = 0.0;
  double zone_thermal_power_w = 0.0;  // heat delivered to the zone (signed)
  double reheat_power_w = 0.0;        // hot-water coil duty, >= 0
  double discharge_temp_c = 0.0;
  bool reheat_active = false;
};

// Deadband thermostat with a linear proportional band on each side: airflow
// ramps to max for cooling, the reheat coil ramps the discharge temperature
// toward min(T̂_b, cap) for heating.
inline VavResult vav_update(double zone_temp_c, const ZoneSetpoints& sp, double supply_air_temp_c,
                            double supply_water_temp_c, const VavConfig& cfg) {
  sp.validate();
  cfg.validate();
  VavResult r;
  r.airflow_kg_s = cfg.min_airflow_kg_s;
  r.discharge_temp_c = supply_air_temp_c;
  if (zone_temp_c > sp.cooling_c) {
    const double frac = std::clamp((zone_temp_c - sp.cooling_c) / cfg.proportional_band_c, 0.0, 1.0);
    r.airflow_kg_s = cfg.min_airflow_kg_s + frac * (cfg.max_airflow_kg_s - cfg.min_airflow_kg_s);
  } else if (zone_temp_c < sp.heating_c) {
    const double target = std::min(supply_water_temp_c, cfg.discharge_temp_cap_c);
    const double frac = std::clamp((sp.heating_c - zone_temp_c) / cfg.proportional_band_c, 0.0, 1.0);
    if (target > supply_air_temp_c) {
      r.discharge_temp_c = supply_air_temp_c + frac * (target - supply_air_temp_c);
      r.reheat_power_w = r.airflow_kg_s * kAirSpecificHeat * (r.discharge_temp_c - supply_air_temp_c);
      r.reheat_active = r.reheat_power_w > 0.0;
    }
  }
  r.zone_thermal_power_w = r.airflow_kg_s * kAirSpecificHeat * (r.discharge_temp_c - zone_temp_c);
  return r;
}

struct AhuConfig {
  double rated_fan_power_w = 10000.0;
  double rated_airflow_kg_s = 10.0;
  double recirc_fraction = 0.7;

  void validate() const {
    if (rated_airflow_kg_s <= 0) fail<ValidationError>("AHU rated airflow must be > 0");
    if (recirc_fraction < 0 || recirc_fraction > 1) fail<ValidationError>("recirc fraction must be in [0,1]");
  }
};

struct AhuResult {
  double fan_power_w = 0.0;
  double heating_load_w = 0.0;  // routed to the hot-water loop
  double cooling_load_w = 0.0;  // routed to the chiller
  double outside_airflow_cfm = 0.0;
  double mixed_air_temp_c = 0.0;
};

inline AhuResult ahu_update(double total_airflow_kg_s, double supply_air_temp_c, double outside_temp_c,
                            double return_air_temp_c, double recirc_fraction, const AhuConfig& cfg) {
  cfg.validate();
  if (total_airflow_kg_s < 0) fail<ValidationError>("total airflow must be >= 0");
  AhuResult r;
  const double ratio = total_airflow_kg_s / cfg.rated_airflow_kg_s;
  // Cube fan law, clamped at the rated power.
  r.fan_power_w = std::min(cfg.rated_fan_power_w * ratio * ratio * ratio, cfg.rated_fan_power_w);
  r.mixed_air_temp_c = recirc_fraction * return_air_temp_c + (1.0 - recirc_fraction) * outside_temp_c;
  const double load = total_airflow_kg_s * kAirSpecificHeat * (supply_air_temp_c - r.mixed_air_temp_c);
  if (load >= 0) {
    r.heating_load_w = load;
  } else {
    r.cooling_load_w = -load;
  }
  r.outside_airflow_cfm = (1.0 - recirc_fraction) * total_airflow_kg_s / kAirDensity * kM3sToCfm;
  return r;
}

struct BoilerConfig {
  double max_gas_power_w = 200000.0;
  double rated_pump_power_w = 2000.0;
  double efficiency = 0.85;
  double standby_fraction = 0.1;

  void validate() const {
    if (efficiency <= 0 || efficiency > 1) fail<ValidationError>("boiler efficiency must be in (0,1]");
    if (max_gas_power_w < 0 || rated_pump_power_w < 0) fail<ValidationError>("boiler ratings must be >= 0");
  }
};

struct BoilerResult {
  double gas_power_w = 0.0;
  double pump_power_w = 0.0;
  double unmet_load_w = 0.0;
};

inline BoilerResult boiler_update(double hot_water_demand_w, double supply_water_temp_c,
                                  const BoilerConfig& cfg) {
  (void)supply_water_temp_c;  // setpoint tracking is folded into the VAV discharge law
  cfg.validate();
  BoilerResult r;
  const double wanted = std::max(hot_water_demand_w, 0.0) / cfg.efficiency;
  r.gas_power_w = std::clamp(wanted, 0.0, cfg.max_gas_power_w);
  r.unmet_load_w = std::max(wanted - cfg.max_gas_power_w, 0.0) * cfg.efficiency;
  r.pump_power_w = hot_water_demand_w > 0.0 ? cfg.rated_pump_power_w
                                            : cfg.standby_fraction * cfg.rated_pump_power_w;
  return r;
}

struct ChillerConfig {
  double max_electrical_power_w = 100000.0;
  double cop = 3.5;

  void validate() const {
    if (cop <= 0) fail<ValidationError>("chiller COP must be > 0");
    if (max_electrical_power_w < 0) fail<ValidationError>("chiller rating must be >= 0");
  }
};

struct ChillerResult {
  double electrical_power_w = 0.0;
  double unmet_load_w = 0.0;
};

inline ChillerResult chiller_update(double cooling_load_w, const ChillerConfig& cfg) {
  cfg.validate();
  ChillerResult r;
  const double wanted = std::max(cooling_load_w, 0.0) / cfg.cop;
  r.electrical_power_w = std::clamp(wanted, 0.0, cfg.max_electrical_power_w);
  r.unmet_load_w = std::max(wanted - cfg.max_electrical_power_w, 0.0) * cfg.cop;
  return r;
}

// Aggregated electrical/gas power for the reward bookkeeping. Ẇ_a is the
// refrigeration cycle, Ẇ_m the blowers, Ẇ_p the pumps, Q̇_g the boiler gas.
struct DevicePower {
  double refrigeration_w = 0.0;
  double refrigeration_max_w = 0.0;
  double blower_w = 0.0;
  double blower_max_w = 0.0;
  double pump_w = 0.0;
  double pump_max_w = 0.0;
  double gas_w = 0.0;
  double gas_max_w = 0.0;
};

struct AirflowState {
  std::map<std::string, double> zone_airflow_kg_s;
  double total_airflow_kg_s = 0.0;
  double outside_air_fraction = 0.0;
  double outside_airflow_cfm = 0.0;
};

struct PlantConfig {
  std::map<std::string, VavConfig> vav_by_device;  // device id -> config
  AhuConfig ahu;
  BoilerConfig boiler;
  ChillerConfig chiller;
};

struct PlantResult {
  std::map<std::string, double> device_thermal_w;  // VAV device id -> q_zone (W)
  std::map<std::string, VavResult> vav_results;    // device id -> detail
  AhuResult ahu;
  BoilerResult boiler;
  ChillerResult chiller;
  DevicePower power;
  AirflowState airflow;
};

// One plant evaluation: VAV loops -> air handler -> boiler/chiller.
// zone_temps_c maps zone id -> current mean zone temperature; zone_setpoints
// provides the thermostat bands; vav_zone maps each VAV device to its zone.
inline PlantResult plant_step(const std::map<std::string, double>& zone_temps_c,
                              const std::map<std::string, ZoneSetpoints>& zone_setpoints,
                              const std::map<std::string, std::string>& vav_zone,
                              const SetpointVector& action, double outside_temp_c,
                              const PlantConfig& cfg) {
  PlantResult out;
  double total_airflow = 0.0;
  double weighted_return = 0.0;
  double reheat_demand = 0.0;
  bool any_reheat = false;

  for (const auto& [device_id, zone_id] : vav_zone) {
    const auto tz_it = zone_temps_c.find(zone_id);
    if (tz_it == zone_temps_c.end()) fail<ConfigError>("VAV ", device_id, ": no temperature for zone ", zone_id);
    const auto sp_it = zone_setpoints.find(zone_id);
    if (sp_it == zone_setpoints.end()) fail<ConfigError>("VAV ", device_id, ": no setpoints for zone ", zone_id);
    const auto cfg_it = cfg.vav_by_device.find(device_id);
    if (cfg_it == cfg.vav_by_device.end()) fail<ConfigError>("VAV ", device_id, ": missing config");

    const VavResult vr = vav_update(tz_it->second, sp_it->second, action.supply_air_temp_c,
                                    action.supply_water_temp_c, cfg_it->second);
    out.vav_results[device_id] = vr;
    out.device_thermal_w[device_id] = vr.zone_thermal_power_w;
    out.airflow.zone_airflow_kg_s[zone_id] += vr.airflow_kg_s;
    total_airflow += vr.airflow_kg_s;
    weighted_return += vr.airflow_kg_s * tz_it->second;
    reheat_demand += vr.reheat_power_w;
    any_reheat = any_reheat || vr.reheat_active;
  }

  const double return_temp =
      total_airflow > 0.0 ? weighted_return / total_airflow : action.supply_air_temp_c;
  out.ahu = ahu_update(total_airflow, action.supply_air_temp_c, outside_temp_c, return_temp,
                       cfg.ahu.recirc_fraction, cfg.ahu);

  const double hot_water_demand = reheat_demand + out.ahu.heating_load_w;
  out.boiler = boiler_update(hot_water_demand, action.supply_water_temp_c, cfg.boiler);
  if (out.ahu.heating_load_w > 0.0) any_reheat = true;
  out.boiler.pump_power_w = any_reheat ? cfg.boiler.rated_pump_power_w
                                       : cfg.boiler.standby_fraction * cfg.boiler.rated_pump_power_w;
  out.chiller = chiller_update(out.ahu.cooling_load_w, cfg.chiller);

  out.power.refrigeration_w = out.chiller.electrical_power_w;
  out.power.refrigeration_max_w = cfg.chiller.max_electrical_power_w;
  out.power.blower_w = out.ahu.fan_power_w;
  out.power.blower_max_w = cfg.ahu.rated_fan_power_w;
  out.power.pump_w = out.boiler.pump_power_w;
  out.power.pump_max_w = cfg.boiler.rated_pump_power_w;
  out.power.gas_w = out.boiler.gas_power_w;
  out.power.gas_max_w = cfg.boiler.max_gas_power_w;

  out.airflow.total_airflow_kg_s = total_airflow;
  out.airflow.outside_air_fraction = 1.0 - cfg.ahu.recirc_fraction;
  out.airflow.outside_airflow_cfm = out.ahu.outside_airflow_cfm;
  return out;
}

}  // namespace sbsim
