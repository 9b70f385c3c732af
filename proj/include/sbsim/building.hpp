#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsim/core.hpp"
#include "sbsim/grid_model.hpp"
#include "sbsim/hvac.hpp"
#include "sbsim/reward.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

using json = nlohmann::json;

struct ZoneConfig {
  std::string id;
  int floor = 0;
  std::vector<Cell> cells;
  ZoneSetpointSchedule setpoints;
  OccupancyParams occupancy;
};

struct DeviceConfig {
  std::string id;
  DeviceType type = DeviceType::VAV;
  int floor = 0;
  std::string zone_id;             // VAV
  std::vector<Cell> diffusers;     // VAV
  VavConfig vav;
  AhuConfig ahu;
  BoilerConfig boiler;
  ChillerConfig chiller;
};

struct WeatherConfig {
  std::string type = "sine";  // constant | sine | csv
  double constant_c = 10.0;
  double mean_c = 12.0;
  double amplitude_c = 8.0;
  double peak_hour = 15.0;
  std::string csv_path;
};

// Outside air temperature as a function of time.
class WeatherModel {
 public:
  WeatherModel() = default;
  explicit WeatherModel(const WeatherConfig& cfg) : cfg_(cfg) {
    if (cfg.type == "csv") {
      std::ifstream in(cfg.csv_path);
      if (!in) fail<ConfigError>("weather csv '", cfg.csv_path, "' not readable");
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line.rfind("timestamp", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail<ParseError>("weather csv: bad line '", line, "'");
        series_.emplace_back(parse_rfc3339(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
      }
      if (series_.empty()) fail<ConfigError>("weather csv '", cfg.csv_path, "' has no rows");
    } else if (cfg.type != "constant" && cfg.type != "sine") {
      fail<ConfigError>("unknown weather type '", cfg.type, "'");
    }
  }

  double at(UnixTime t) const {
    if (cfg_.type == "constant") return cfg_.constant_c;
    if (cfg_.type == "sine") {
      const double hour = seconds_of_day(t) / 3600.0;
      return cfg_.mean_c + cfg_.amplitude_c * std::cos(2.0 * M_PI * (hour - cfg_.peak_hour) / 24.0);
    }
    // csv: step function, last sample at or before t.
    double value = series_.front().second;
    for (const auto& [ts, v] : series_) {
      if (ts > t) break;
      value = v;
    }
    return value;
  }

 private:
  WeatherConfig cfg_;
  std::vector<std::pair<UnixTime, double>> series_;
};

struct RewardConfig {
  double weight_comfort = 1.0 / 3.0;
  double weight_energy = 1.0 / 3.0;
  double weight_carbon = 1.0 / 3.0;
  ComfortParams comfort;
  TariffAndEmissions tariff;
  AirQualityParams air_quality;
  std::string tariff_csv;  // optional time-varying rates

  RewardWeights weights() const {
    return RewardWeights::normalized(weight_comfort, weight_energy, weight_carbon);
  }
};

struct EnvironmentConfig {
  int horizon_steps = 288;
  std::string start_time = "2023-07-10T00:00:00Z";
  double initial_temp_c = 21.0;
  bool observation_histogram = false;
};

struct BuildingConfig {
  int version = 1;
  std::string name = "building";
  double cv_size_m = 0.5;
  double floor_height_m = 3.0;
  double timestep_s = 300.0;
  std::vector<Grid2D<CellClass>> floor_grids;
  MaterialParams materials;
  std::vector<ZoneConfig> zones;
  std::vector<DeviceConfig> devices;
  ActionBounds action_bounds;
  RewardConfig reward;
  WeatherConfig weather;
  EnvironmentConfig environment;
  std::vector<std::string> holidays;  // YYYY-MM-DD

  int num_floors() const { return static_cast<int>(floor_grids.size()); }

  FloorplanGrid floorplan(int floor) const {
    FloorplanGrid g;
    g.cells = floor_grids[floor];
    g.width = g.cells.cols();
    g.height = g.cells.rows();
    g.cv_size_m = cv_size_m;
    g.floor_height_m = floor_height_m;
    return g;
  }

  Calendar calendar() const {
    Calendar cal;
    for (const std::string& h : holidays) cal.holidays.insert(parse_date(h));
    return cal;
  }

  ZoneMap zone_map() const {
    std::vector<ZoneInfo> infos;
    infos.reserve(zones.size());
    for (const ZoneConfig& z : zones) {
      ZoneInfo info;
      info.id = z.id;
      info.floor = z.floor;
      info.cells = z.cells;
      info.area_m2 = static_cast<double>(z.cells.size()) * cv_size_m * cv_size_m;
      info.heating_setpoint_c = z.setpoints.occupied.heating_c;
      info.cooling_setpoint_c = z.setpoints.occupied.cooling_c;
      for (const DeviceConfig& d : devices) {
        if (d.zone_id == z.id && d.type == DeviceType::VAV) info.device_ids.push_back(d.id);
      }
      infos.push_back(std::move(info));
    }
    return ZoneMap(std::move(infos), num_floors(), floor_grids);
  }

  DeviceLayout device_layout() const {
    std::vector<DeviceInfo> infos;
    for (const DeviceConfig& d : devices) {
      DeviceInfo info;
      info.id = d.id;
      info.type = d.type;
      info.zone_id = d.zone_id;
      for (const Cell& c : d.diffusers) info.diffusers.push_back({d.floor, c});
      switch (d.type) {
        case DeviceType::VAV:
          info.observable_fields = {d.id + "/airflow_rate_kg_s", d.id + "/reheat_power_w"};
          break;
        case DeviceType::AHU:
          info.observable_fields = {d.id + "/fan_power_w", d.id + "/outside_airflow_cfm",
                                    d.id + "/mixed_air_temp_c"};
          info.action_fields = {d.id + "/supply_air_temperature_setpoint"};
          info.max_power_w["fan"] = d.ahu.rated_fan_power_w;
          break;
        case DeviceType::Boiler:
          info.observable_fields = {d.id + "/gas_power_w", d.id + "/pump_power_w"};
          info.action_fields = {d.id + "/supply_water_temperature_setpoint"};
          info.max_power_w["gas"] = d.boiler.max_gas_power_w;
          info.max_power_w["pump"] = d.boiler.rated_pump_power_w;
          break;
        case DeviceType::Chiller:
          info.observable_fields = {d.id + "/electrical_power_w"};
          info.max_power_w["electrical"] = d.chiller.max_electrical_power_w;
          break;
        case DeviceType::Meter:
          info.observable_fields = {d.id + "/electricity_w", d.id + "/gas_w"};
          break;
      }
      infos.push_back(std::move(info));
    }
    return DeviceLayout(std::move(infos));
  }

  PlantConfig plant_config() const {
    PlantConfig cfg;
    for (const DeviceConfig& d : devices) {
      switch (d.type) {
        case DeviceType::VAV: cfg.vav_by_device[d.id] = d.vav; break;
        case DeviceType::AHU: cfg.ahu = d.ahu; break;
        case DeviceType::Boiler: cfg.boiler = d.boiler; break;
        case DeviceType::Chiller: cfg.chiller = d.chiller; break;
        case DeviceType::Meter: break;
      }
    }
    return cfg;
  }

  bool has_plant() const {
    for (const DeviceConfig& d : devices) {
      if (d.type == DeviceType::VAV) return true;
    }
    return false;
  }

  std::map<std::string, std::string> vav_zone_map() const {
    std::map<std::string, std::string> m;
    for (const DeviceConfig& d : devices) {
      if (d.type == DeviceType::VAV) m[d.id] = d.zone_id;
    }
    return m;
  }

  void validate() const {
    if (version != 1) fail<ConfigError>("unsupported building config version ", version);
    if (floor_grids.empty()) fail<ConfigError>("building has no floors");
    materials.validate();
    for (int fl = 0; fl < num_floors(); ++fl) floorplan(fl).validate();
    zone_map();  // throws on overlap / non-air cells
    device_layout().validate_against(floor_grids);
    int n_ahu = 0, n_boiler = 0, n_chiller = 0, n_vav = 0;
    for (const DeviceConfig& d : devices) {
      switch (d.type) {
        case DeviceType::VAV: {
          ++n_vav;
          d.vav.validate();
          bool found = false;
          for (const ZoneConfig& z : zones) found = found || z.id == d.zone_id;
          if (!found) fail<ConfigError>("VAV ", d.id, " references unknown zone '", d.zone_id, "'");
          break;
        }
        case DeviceType::AHU: ++n_ahu; d.ahu.validate(); break;
        case DeviceType::Boiler: ++n_boiler; d.boiler.validate(); break;
        case DeviceType::Chiller: ++n_chiller; d.chiller.validate(); break;
        case DeviceType::Meter: break;
      }
    }
    if (n_ahu > 1 || n_boiler > 1 || n_chiller > 1) {
      fail<ConfigError>("at most one AHU, boiler, and chiller are supported");
    }
    if (n_vav > 0 && (n_ahu == 0 || n_boiler == 0)) {
      fail<ConfigError>("buildings with VAVs need an AHU and a boiler in the config");
    }
    for (const ZoneConfig& z : zones) {
      z.setpoints.validate();
      if (z.occupancy.max_occupants > 0) z.occupancy.validate();
    }
    reward.weights();
    reward.comfort.validate();
    reward.tariff.validate();
    reward.air_quality.validate();
    if (!(timestep_s > 0)) fail<ConfigError>("timestep_s must be > 0");
    if (environment.horizon_steps <= 0) fail<ConfigError>("horizon_steps must be > 0");
  }
};

// ---------------------------------------------------------------------------
// JSON encoding. The grid is a row-major integer matrix (0 = exterior air,
// 1 = interior air, 2 = interior wall, 3 = exterior wall).

namespace detail {

inline json grid_to_json(const Grid2D<CellClass>& g) {
  json rows = json::array();
  for (int r = 0; r < g.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < g.cols(); ++c) row.push_back(static_cast<int>(g(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Grid2D<CellClass> grid_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail<ParseError>("floor grid must be a non-empty matrix");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Grid2D<CellClass> g(rows, cols, CellClass::ExteriorAir);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) fail<ParseError>("ragged floor grid at row ", r);
    for (int c = 0; c < cols; ++c) {
      const int v = j[r][c].get<int>();
      if (v < 0 || v > 3) fail<ParseError>("bad cell class ", v, " at (", r, ",", c, ")");
      g(r, c) = static_cast<CellClass>(v);
    }
  }
  return g;
}

inline json cells_to_json(const std::vector<Cell>& cells) {
  json out = json::array();
  for (const Cell& c : cells) out.push_back(json::array({c.row, c.col}));
  return out;
}

inline std::vector<Cell> cells_from_json(const json& j) {
  std::vector<Cell> out;
  for (const auto& e : j) out.push_back({e[0].get<int>(), e[1].get<int>()});
  return out;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (j.contains(key)) return j[key].get<T>();
  return fallback;
}

}  // namespace detail

inline json to_json(const BuildingConfig& b) {
  json j;
  j["version"] = b.version;
  j["name"] = b.name;
  j["cv_size_m"] = b.cv_size_m;
  j["floor_height_m"] = b.floor_height_m;
  j["timestep_s"] = b.timestep_s;
  json floors = json::array();
  for (const auto& g : b.floor_grids) floors.push_back({{"grid", detail::grid_to_json(g)}});
  j["floors"] = std::move(floors);
  j["materials"] = {
      {"convection_coefficient", b.materials.convection_coefficient},
      {"exterior_cv_conductivity", b.materials.exterior_cv_conductivity},
      {"exterior_cv_density", b.materials.exterior_cv_density},
      {"exterior_cv_heat_capacity", b.materials.exterior_cv_heat_capacity},
      {"interior_wall_cv_conductivity", b.materials.interior_wall_cv_conductivity},
      {"interior_wall_cv_density", b.materials.interior_wall_cv_density},
      {"interior_wall_cv_heat_capacity", b.materials.interior_wall_cv_heat_capacity},
      {"swap_prob", b.materials.swap_prob},
      {"swap_radius", b.materials.swap_radius},
  };
  json zones = json::array();
  for (const ZoneConfig& z : b.zones) {
    zones.push_back({{"id", z.id},
                     {"floor", z.floor},
                     {"cells", detail::cells_to_json(z.cells)},
                     {"heating_setpoint_c", z.setpoints.occupied.heating_c},
                     {"cooling_setpoint_c", z.setpoints.occupied.cooling_c},
                     {"unoccupied_heating_setpoint_c", z.setpoints.unoccupied.heating_c},
                     {"unoccupied_cooling_setpoint_c", z.setpoints.unoccupied.cooling_c},
                     {"occupied_start_s", z.setpoints.occupied_start_s},
                     {"occupied_end_s", z.setpoints.occupied_end_s},
                     {"weekends_unoccupied", z.setpoints.weekends_unoccupied},
                     {"occupancy",
                      {{"max_occupants", z.occupancy.max_occupants},
                       {"arrival_start_s", z.occupancy.arrival_start_s},
                       {"arrival_end_s", z.occupancy.arrival_end_s},
                       {"departure_start_s", z.occupancy.departure_start_s},
                       {"departure_end_s", z.occupancy.departure_end_s}}}});
  }
  j["zones"] = std::move(zones);
  json devices = json::array();
  for (const DeviceConfig& d : b.devices) {
    json dj = {{"id", d.id}, {"type", to_string(d.type)}, {"floor", d.floor}};
    switch (d.type) {
      case DeviceType::VAV:
        dj["zone"] = d.zone_id;
        dj["diffuser_cells"] = detail::cells_to_json(d.diffusers);
        dj["min_airflow_kg_s"] = d.vav.min_airflow_kg_s;
        dj["max_airflow_kg_s"] = d.vav.max_airflow_kg_s;
        dj["discharge_temp_cap_c"] = d.vav.discharge_temp_cap_c;
        dj["proportional_band_c"] = d.vav.proportional_band_c;
        break;
      case DeviceType::AHU:
        dj["rated_fan_power_w"] = d.ahu.rated_fan_power_w;
        dj["rated_airflow_kg_s"] = d.ahu.rated_airflow_kg_s;
        dj["recirc_fraction"] = d.ahu.recirc_fraction;
        break;
      case DeviceType::Boiler:
        dj["max_gas_power_w"] = d.boiler.max_gas_power_w;
        dj["rated_pump_power_w"] = d.boiler.rated_pump_power_w;
        dj["efficiency"] = d.boiler.efficiency;
        dj["standby_fraction"] = d.boiler.standby_fraction;
        break;
      case DeviceType::Chiller:
        dj["max_electrical_power_w"] = d.chiller.max_electrical_power_w;
        dj["cop"] = d.chiller.cop;
        break;
      case DeviceType::Meter:
        break;
    }
    devices.push_back(std::move(dj));
  }
  j["devices"] = std::move(devices);
  j["action_bounds"] = {
      {"supply_water_temp_c", {b.action_bounds.supply_water_min_c, b.action_bounds.supply_water_max_c}},
      {"supply_air_temp_c", {b.action_bounds.supply_air_min_c, b.action_bounds.supply_air_max_c}}};
  j["reward"] = {{"weights", {{"u", b.reward.weight_comfort}, {"v", b.reward.weight_energy}, {"w", b.reward.weight_carbon}}},
                 {"comfort", {{"lambda_per_c", b.reward.comfort.lambda_per_c}, {"delta_c", b.reward.comfort.delta_c}}},
                 {"tariff",
                  {{"electricity_price_per_kwh", b.reward.tariff.electricity_price_per_kwh},
                   {"gas_price_per_kwh", b.reward.tariff.gas_price_per_kwh},
                   {"electricity_kgc_per_kwh", b.reward.tariff.electricity_kgc_per_kwh},
                   {"gas_kgc_per_kwh", b.reward.tariff.gas_kgc_per_kwh}}},
                 {"air_quality",
                  {{"enabled", b.reward.air_quality.enabled},
                   {"weight", b.reward.air_quality.weight},
                   {"rate_per_person_cfm", b.reward.air_quality.rate_per_person_cfm},
                   {"rate_per_area_cfm_ft2", b.reward.air_quality.rate_per_area_cfm_ft2},
                   {"lambda", b.reward.air_quality.lambda}}},
                 {"tariff_csv", b.reward.tariff_csv}};
  j["weather"] = {{"type", b.weather.type},         {"constant_c", b.weather.constant_c},
                  {"mean_c", b.weather.mean_c},     {"amplitude_c", b.weather.amplitude_c},
                  {"peak_hour", b.weather.peak_hour}, {"csv_path", b.weather.csv_path}};
  j["environment"] = {{"horizon_steps", b.environment.horizon_steps},
                      {"start_time", b.environment.start_time},
                      {"initial_temp_c", b.environment.initial_temp_c},
                      {"observation_histogram", b.environment.observation_histogram}};
  j["holidays"] = b.holidays;
  return j;
}

inline BuildingConfig building_from_json(const json& j) {
  BuildingConfig b;
  if (!j.contains("version")) fail<ParseError>("building config: missing mandatory 'version' field");
  b.version = j["version"].get<int>();
  b.name = detail::get_or<std::string>(j, "name", "building");
  b.cv_size_m = j.at("cv_size_m").get<double>();
  b.floor_height_m = j.at("floor_height_m").get<double>();
  b.timestep_s = detail::get_or<double>(j, "timestep_s", 300.0);
  for (const auto& fj : j.at("floors")) b.floor_grids.push_back(detail::grid_from_json(fj.at("grid")));
  if (j.contains("materials")) {
    const json& m = j["materials"];
    b.materials.convection_coefficient = m.at("convection_coefficient").get<double>();
    b.materials.exterior_cv_conductivity = m.at("exterior_cv_conductivity").get<double>();
    b.materials.exterior_cv_density = m.at("exterior_cv_density").get<double>();
    b.materials.exterior_cv_heat_capacity = m.at("exterior_cv_heat_capacity").get<double>();
    b.materials.interior_wall_cv_conductivity = m.at("interior_wall_cv_conductivity").get<double>();
    b.materials.interior_wall_cv_density = m.at("interior_wall_cv_density").get<double>();
    b.materials.interior_wall_cv_heat_capacity = m.at("interior_wall_cv_heat_capacity").get<double>();
    b.materials.swap_prob = m.at("swap_prob").get<double>();
    b.materials.swap_radius = m.at("swap_radius").get<double>();
  }
  for (const auto& zj : detail::get_or<json>(j, "zones", json::array())) {
    ZoneConfig z;
    z.id = zj.at("id").get<std::string>();
    z.floor = detail::get_or<int>(zj, "floor", 0);
    z.cells = detail::cells_from_json(zj.at("cells"));
    z.setpoints.occupied.heating_c = detail::get_or<double>(zj, "heating_setpoint_c", 20.0);
    z.setpoints.occupied.cooling_c = detail::get_or<double>(zj, "cooling_setpoint_c", 24.0);
    z.setpoints.unoccupied.heating_c =
        detail::get_or<double>(zj, "unoccupied_heating_setpoint_c", z.setpoints.occupied.heating_c);
    z.setpoints.unoccupied.cooling_c =
        detail::get_or<double>(zj, "unoccupied_cooling_setpoint_c", z.setpoints.occupied.cooling_c);
    z.setpoints.occupied_start_s = detail::get_or<int>(zj, "occupied_start_s", 7 * 3600);
    z.setpoints.occupied_end_s = detail::get_or<int>(zj, "occupied_end_s", 18 * 3600);
    z.setpoints.weekends_unoccupied = detail::get_or<bool>(zj, "weekends_unoccupied", true);
    if (zj.contains("occupancy")) {
      const json& oj = zj["occupancy"];
      z.occupancy.max_occupants = detail::get_or<double>(oj, "max_occupants", 0.0);
      z.occupancy.arrival_start_s = detail::get_or<int>(oj, "arrival_start_s", 8 * 3600);
      z.occupancy.arrival_end_s = detail::get_or<int>(oj, "arrival_end_s", 9 * 3600);
      z.occupancy.departure_start_s = detail::get_or<int>(oj, "departure_start_s", 17 * 3600);
      z.occupancy.departure_end_s = detail::get_or<int>(oj, "departure_end_s", 18 * 3600);
    }
    b.zones.push_back(std::move(z));
  }
  for (const auto& dj : detail::get_or<json>(j, "devices", json::array())) {
    DeviceConfig d;
    d.id = dj.at("id").get<std::string>();
    d.type = device_type_from_string(dj.at("type").get<std::string>());
    d.floor = detail::get_or<int>(dj, "floor", 0);
    switch (d.type) {
      case DeviceType::VAV:
        d.zone_id = dj.at("zone").get<std::string>();
        d.diffusers = detail::cells_from_json(dj.at("diffuser_cells"));
        d.vav.min_airflow_kg_s = dj.at("min_airflow_kg_s").get<double>();
        d.vav.max_airflow_kg_s = dj.at("max_airflow_kg_s").get<double>();
        d.vav.discharge_temp_cap_c = detail::get_or<double>(dj, "discharge_temp_cap_c", 35.0);
        d.vav.proportional_band_c = detail::get_or<double>(dj, "proportional_band_c", 2.0);
        break;
      case DeviceType::AHU:
        d.ahu.rated_fan_power_w = dj.at("rated_fan_power_w").get<double>();
        d.ahu.rated_airflow_kg_s = dj.at("rated_airflow_kg_s").get<double>();
        d.ahu.recirc_fraction = dj.at("recirc_fraction").get<double>();
        break;
      case DeviceType::Boiler:
        d.boiler.max_gas_power_w = dj.at("max_gas_power_w").get<double>();
        d.boiler.rated_pump_power_w = dj.at("rated_pump_power_w").get<double>();
        d.boiler.efficiency = detail::get_or<double>(dj, "efficiency", 0.85);
        d.boiler.standby_fraction = detail::get_or<double>(dj, "standby_fraction", 0.1);
        break;
      case DeviceType::Chiller:
        d.chiller.max_electrical_power_w = dj.at("max_electrical_power_w").get<double>();
        d.chiller.cop = detail::get_or<double>(dj, "cop", 3.5);
        break;
      case DeviceType::Meter:
        break;
    }
    b.devices.push_back(std::move(d));
  }
  if (j.contains("action_bounds")) {
    const json& a = j["action_bounds"];
    b.action_bounds.supply_water_min_c = a.at("supply_water_temp_c")[0].get<double>();
    b.action_bounds.supply_water_max_c = a.at("supply_water_temp_c")[1].get<double>();
    b.action_bounds.supply_air_min_c = a.at("supply_air_temp_c")[0].get<double>();
    b.action_bounds.supply_air_max_c = a.at("supply_air_temp_c")[1].get<double>();
  }
  if (j.contains("reward")) {
    const json& r = j["reward"];
    if (r.contains("weights")) {
      b.reward.weight_comfort = r["weights"].at("u").get<double>();
      b.reward.weight_energy = r["weights"].at("v").get<double>();
      b.reward.weight_carbon = r["weights"].at("w").get<double>();
    }
    if (r.contains("comfort")) {
      b.reward.comfort.lambda_per_c = r["comfort"].at("lambda_per_c").get<double>();
      b.reward.comfort.delta_c = r["comfort"].at("delta_c").get<double>();
    }
    if (r.contains("tariff")) {
      const json& t = r["tariff"];
      b.reward.tariff.electricity_price_per_kwh = t.at("electricity_price_per_kwh").get<double>();
      b.reward.tariff.gas_price_per_kwh = t.at("gas_price_per_kwh").get<double>();
      b.reward.tariff.electricity_kgc_per_kwh = t.at("electricity_kgc_per_kwh").get<double>();
      b.reward.tariff.gas_kgc_per_kwh = t.at("gas_kgc_per_kwh").get<double>();
    }
    if (r.contains("air_quality")) {
      const json& a = r["air_quality"];
      b.reward.air_quality.enabled = detail::get_or<bool>(a, "enabled", false);
      b.reward.air_quality.weight = detail::get_or<double>(a, "weight", 0.0);
      b.reward.air_quality.rate_per_person_cfm = detail::get_or<double>(a, "rate_per_person_cfm", 5.0);
      b.reward.air_quality.rate_per_area_cfm_ft2 = detail::get_or<double>(a, "rate_per_area_cfm_ft2", 0.06);
      b.reward.air_quality.lambda = detail::get_or<double>(a, "lambda", 1.0);
    }
    b.reward.tariff_csv = detail::get_or<std::string>(r, "tariff_csv", "");
  }
  if (j.contains("weather")) {
    const json& w = j["weather"];
    b.weather.type = detail::get_or<std::string>(w, "type", "sine");
    b.weather.constant_c = detail::get_or<double>(w, "constant_c", 10.0);
    b.weather.mean_c = detail::get_or<double>(w, "mean_c", 12.0);
    b.weather.amplitude_c = detail::get_or<double>(w, "amplitude_c", 8.0);
    b.weather.peak_hour = detail::get_or<double>(w, "peak_hour", 15.0);
    b.weather.csv_path = detail::get_or<std::string>(w, "csv_path", "");
  }
  if (j.contains("environment")) {
    const json& e = j["environment"];
    b.environment.horizon_steps = detail::get_or<int>(e, "horizon_steps", 288);
    b.environment.start_time = detail::get_or<std::string>(e, "start_time", "2023-07-10T00:00:00Z");
    b.environment.initial_temp_c = detail::get_or<double>(e, "initial_temp_c", 21.0);
    b.environment.observation_histogram = detail::get_or<bool>(e, "observation_histogram", false);
  }
  b.holidays = detail::get_or<std::vector<std::string>>(j, "holidays", {});
  return b;
}

inline void save_building(const BuildingConfig& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail<ConfigError>("cannot open '", path, "' for writing");
  out << to_json(b).dump(2) << "\n";
}

inline BuildingConfig load_building(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail<ConfigError>("building config '", path, "' not readable");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail<ParseError>("building config '", path, "': ", e.what());
  }
  try {
    BuildingConfig b = building_from_json(j);
    b.validate();
    return b;
  } catch (const json::exception& e) {
    fail<ParseError>("building config '", path, "': ", e.what());
  }
}

inline std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail<ConfigError>("cannot read '", path, "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

}  // namespace sbsim
