#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <system_error>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/core.hpp"
#include "sbsim/reward.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

// Canonical column names shared by the environment, the archive, and replay.
namespace names {
inline std::string zone_temp(const std::string& z) { return "zone/" + z + "/temperature"; }
inline std::string zone_heating_sp(const std::string& z) { return "zone/" + z + "/heating_setpoint"; }
inline std::string zone_cooling_sp(const std::string& z) { return "zone/" + z + "/cooling_setpoint"; }
inline std::string zone_airflow(const std::string& z) { return "zone/" + z + "/airflow_kg_s"; }
inline std::string zone_occupancy(const std::string& z) { return "zone/" + z + "/occupancy"; }
inline std::string ahu_blower(const std::string& d) { return d + "/blower_electrical_power_w"; }
inline std::string ahu_refrigeration(const std::string& d) { return d + "/air_conditioning_electrical_power_w"; }
inline std::string ahu_outside_airflow(const std::string& d) { return d + "/outside_airflow_cfm"; }
inline std::string boiler_pump(const std::string& d) { return d + "/pump_electrical_power_w"; }
inline std::string boiler_gas(const std::string& d) { return d + "/natural_gas_power_w"; }
constexpr const char* kWeather = "weather/outside_air_temperature";
constexpr const char* kPriceElectricity = "price/electricity_usd_per_kwh";
constexpr const char* kPriceGas = "price/gas_usd_per_kwh";
constexpr const char* kCarbonElectricity = "carbon/electricity_kgc_per_kwh";
constexpr const char* kCarbonGas = "carbon/gas_kgc_per_kwh";
constexpr const char* kReward = "agent_reward_value";
constexpr const char* kC1 = "comfort_c1";
constexpr const char* kC2 = "energy_c2";
constexpr const char* kC3 = "carbon_c3";
constexpr const char* kAirQuality = "air_quality_reward";
}  // namespace names

// A time-indexed named matrix: T timestamps x |names| columns.
struct TimeseriesMatrix {
  std::vector<std::string> names;
  std::vector<UnixTime> timestamps;
  std::vector<std::vector<double>> rows;

  int steps() const { return static_cast<int>(rows.size()); }

  int column(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
      if (names[i] == name) return i;
    }
    return -1;
  }

  double at(int t, const std::string& name) const {
    const int c = column(name);
    if (c < 0) fail<ValidationError>("matrix has no column '", name, "'");
    return rows[t][c];
  }

  void append(UnixTime t, std::vector<double> row) {
    if (row.size() != names.size()) {
      fail<ValidationError>("row width ", row.size(), " != name count ", names.size());
    }
    timestamps.push_back(t);
    rows.push_back(std::move(row));
  }

  friend bool operator==(const TimeseriesMatrix& a, const TimeseriesMatrix& b) {
    return a.names == b.names && a.timestamps == b.timestamps && a.rows == b.rows;
  }
};

struct EpisodeArchive {
  json metadata;
  TimeseriesMatrix observations;
  TimeseriesMatrix actions;
  TimeseriesMatrix reward_info;
  TimeseriesMatrix reward_response;

  void validate() const {
    if (!metadata.contains("version")) fail<ValidationError>("episode metadata missing 'version'");
    if (metadata["version"].get<int>() != 1) {
      fail<ValidationError>("unsupported episode version ", metadata["version"].get<int>());
    }
    const int t = observations.steps();
    for (const TimeseriesMatrix* m : {&actions, &reward_info, &reward_response}) {
      if (m->steps() != t) {
        fail<ValidationError>("episode matrices disagree on step count: ", t, " vs ", m->steps());
      }
    }
    for (const TimeseriesMatrix* m : {&observations, &actions, &reward_info, &reward_response}) {
      if (m->timestamps != observations.timestamps) {
        fail<ValidationError>("episode matrices disagree on timestamps");
      }
      for (const auto& row : m->rows) {
        if (row.size() != m->names.size()) fail<ValidationError>("episode row width mismatch");
      }
    }
  }

  friend bool operator==(const EpisodeArchive& a, const EpisodeArchive& b) {
    return a.metadata == b.metadata && a.observations == b.observations && a.actions == b.actions &&
           a.reward_info == b.reward_info && a.reward_response == b.reward_response;
  }
};

namespace detail {

// Shortest exact decimal form; parses back to the identical double.
inline std::string double_to_string(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double double_from_string(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail<ParseError>("bad numeric value '", std::string(s), "'");
  }
  return v;
}

inline void write_matrix_csv(const TimeseriesMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail<ConfigError>("cannot open '", path.string(), "' for writing");
  out << "timestamp";
  for (const std::string& n : m.names) {
    if (n.find(',') != std::string::npos) fail<ValidationError>("column name contains comma: ", n);
    out << ',' << n;
  }
  out << '\n';
  for (int t = 0; t < m.steps(); ++t) {
    out << format_rfc3339(m.timestamps[t]);
    for (double v : m.rows[t]) out << ',' << double_to_string(v);
    out << '\n';
  }
}

inline TimeseriesMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail<ParseError>("episode matrix '", path.string(), "' missing or unreadable");
  TimeseriesMatrix m;
  std::string line;
  if (!std::getline(in, line)) fail<ParseError>("'", path.string(), "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t pos = line.find(',');
  if (line.substr(0, pos) != "timestamp") fail<ParseError>("'", path.string(), "': bad header");
  while (pos != std::string::npos) {
    const std::size_t next = line.find(',', pos + 1);
    m.names.push_back(line.substr(pos + 1, next == std::string::npos ? next : next - pos - 1));
    pos = next;
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(m.names.size());
    std::size_t start = line.find(',');
    if (start == std::string::npos && !m.names.empty()) {
      fail<ParseError>("'", path.string(), "' line ", lineno, ": truncated row");
    }
    const std::string ts = line.substr(0, start == std::string::npos ? line.size() : start);
    while (start != std::string::npos) {
      const std::size_t next = line.find(',', start + 1);
      row.push_back(double_from_string(
          std::string_view(line).substr(start + 1, next == std::string::npos ? line.size() - start - 1
                                                                             : next - start - 1)));
      start = next;
    }
    if (row.size() != m.names.size()) {
      fail<ParseError>("'", path.string(), "' line ", lineno, ": expected ", m.names.size(),
                       " values, got ", row.size());
    }
    m.timestamps.push_back(parse_rfc3339(ts));
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace detail

// One directory per episode: metadata.json plus the four matrices.
inline void save_episode(const EpisodeArchive& ep, const std::string& dir) {
  ep.validate();
  std::filesystem::path root(dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  std::ofstream meta(root / "metadata.json");
  if (!meta) fail<ConfigError>("cannot write '", (root / "metadata.json").string(), "'");
  meta << ep.metadata.dump(2) << "\n";
  detail::write_matrix_csv(ep.observations, root / "observations.csv");
  detail::write_matrix_csv(ep.actions, root / "actions.csv");
  detail::write_matrix_csv(ep.reward_info, root / "reward_info.csv");
  detail::write_matrix_csv(ep.reward_response, root / "reward_response.csv");
}

inline EpisodeArchive load_episode(const std::string& dir) {
  std::filesystem::path root(dir);
  EpisodeArchive ep;
  std::ifstream meta(root / "metadata.json");
  if (!meta) fail<ParseError>("episode '", dir, "': metadata.json missing");
  try {
    meta >> ep.metadata;
  } catch (const json::exception& e) {
    fail<ParseError>("episode '", dir, "': bad metadata.json: ", e.what());
  }
  ep.observations = detail::read_matrix_csv(root / "observations.csv");
  ep.actions = detail::read_matrix_csv(root / "actions.csv");
  ep.reward_info = detail::read_matrix_csv(root / "reward_info.csv");
  ep.reward_response = detail::read_matrix_csv(root / "reward_response.csv");
  ep.validate();
  return ep;
}

// Builds the static episode metadata from a building config.
inline json make_episode_metadata(const BuildingConfig& b) {
  json meta;
  meta["version"] = 1;
  meta["building"] = b.name;
  meta["timestep_s"] = b.timestep_s;
  json zones = json::array();
  for (const ZoneConfig& z : b.zones) {
    zones.push_back({{"id", z.id},
                     {"floor", z.floor},
                     {"cells", detail::cells_to_json(z.cells)},
                     {"area_m2", static_cast<double>(z.cells.size()) * b.cv_size_m * b.cv_size_m},
                     {"heating_setpoint_c", z.setpoints.occupied.heating_c},
                     {"cooling_setpoint_c", z.setpoints.occupied.cooling_c},
                     {"max_occupants", z.occupancy.max_occupants}});
  }
  meta["zone_info"] = std::move(zones);
  json devices = json::array();
  json locations = json::object();
  const DeviceLayout layout = b.device_layout();
  for (const DeviceInfo& d : layout.devices()) {
    devices.push_back({{"id", d.id},
                       {"type", to_string(d.type)},
                       {"zone", d.zone_id},
                       {"observable_fields", d.observable_fields},
                       {"action_fields", d.action_fields},
                       {"max_power_w", d.max_power_w}});
    json cells = json::array();
    for (const FloorCell& fc : d.diffusers) cells.push_back(json::array({fc.floor, fc.cell.row, fc.cell.col}));
    locations[d.id] = std::move(cells);
  }
  meta["device_info"] = std::move(devices);
  meta["device_locations"] = std::move(locations);
  json floors = json::array();
  for (const auto& g : b.floor_grids) floors.push_back(detail::grid_to_json(g));
  meta["floorplan"] = std::move(floors);
  meta["reward"] = {{"weights", {{"u", b.reward.weight_comfort}, {"v", b.reward.weight_energy}, {"w", b.reward.weight_carbon}}},
                    {"comfort", {{"lambda_per_c", b.reward.comfort.lambda_per_c}, {"delta_c", b.reward.comfort.delta_c}}},
                    {"air_quality",
                     {{"enabled", b.reward.air_quality.enabled},
                      {"weight", b.reward.air_quality.weight},
                      {"rate_per_person_cfm", b.reward.air_quality.rate_per_person_cfm},
                      {"rate_per_area_cfm_ft2", b.reward.air_quality.rate_per_area_cfm_ft2},
                      {"lambda", b.reward.air_quality.lambda}}}};
  return meta;
}

// Recomputes the reward response for step t of an archive from its
// RewardInfo row and static metadata. Returned keys match the
// reward_response column names.
inline std::map<std::string, double> recompute_reward(const EpisodeArchive& ep, int t) {
  const json& meta = ep.metadata;
  const json& rw = meta.at("reward");
  const ComfortParams comfort{rw.at("comfort").at("lambda_per_c").get<double>(),
                              rw.at("comfort").at("delta_c").get<double>()};
  AirQualityParams aq;
  aq.enabled = rw.at("air_quality").at("enabled").get<bool>();
  aq.weight = rw.at("air_quality").at("weight").get<double>();
  aq.rate_per_person_cfm = rw.at("air_quality").at("rate_per_person_cfm").get<double>();
  aq.rate_per_area_cfm_ft2 = rw.at("air_quality").at("rate_per_area_cfm_ft2").get<double>();
  aq.lambda = rw.at("air_quality").at("lambda").get<double>();

  const TimeseriesMatrix& info = ep.reward_info;
  std::vector<double> losses;
  double occupants_total = 0.0;
  double vmin_total_cfm = 0.0;
  for (const json& z : meta.at("zone_info")) {
    const std::string id = z.at("id").get<std::string>();
    const double temp = info.at(t, names::zone_temp(id));
    const double heat_sp = info.at(t, names::zone_heating_sp(id));
    const double cool_sp = info.at(t, names::zone_cooling_sp(id));
    const double occ = info.at(t, names::zone_occupancy(id));
    losses.push_back(comfort_loss(temp, heat_sp, cool_sp, occ, comfort));
    occupants_total += occ;
    if (aq.enabled) {
      const double area_ft2 = z.at("area_m2").get<double>() * 10.7639;
      vmin_total_cfm += min_outside_airflow_cfm(occ, area_ft2, aq);
    }
  }
  const double c1 = building_comfort(losses);

  DevicePower power;
  double outside_airflow_cfm = 0.0;
  for (const json& d : meta.at("device_info")) {
    const std::string id = d.at("id").get<std::string>();
    const std::string type = d.at("type").get<std::string>();
    if (type == "AHU") {
      power.blower_w = info.at(t, names::ahu_blower(id));
      power.refrigeration_w = info.at(t, names::ahu_refrigeration(id));
      outside_airflow_cfm = info.at(t, names::ahu_outside_airflow(id));
      power.blower_max_w = d.at("max_power_w").value("fan", 0.0);
    } else if (type == "Boiler") {
      power.pump_w = info.at(t, names::boiler_pump(id));
      power.gas_w = info.at(t, names::boiler_gas(id));
      power.pump_max_w = d.at("max_power_w").value("pump", 0.0);
      power.gas_max_w = d.at("max_power_w").value("gas", 0.0);
    } else if (type == "Chiller") {
      power.refrigeration_max_w = d.at("max_power_w").value("electrical", 0.0);
    }
  }
  TariffAndEmissions tariff;
  tariff.electricity_price_per_kwh = info.at(t, names::kPriceElectricity);
  tariff.gas_price_per_kwh = info.at(t, names::kPriceGas);
  tariff.electricity_kgc_per_kwh = info.at(t, names::kCarbonElectricity);
  tariff.gas_kgc_per_kwh = info.at(t, names::kCarbonGas);

  const double c2 = energy_cost(power, tariff);
  const double c3 = carbon_cost(power, tariff);

  const double u_raw = rw.at("weights").at("u").get<double>();
  const double v_raw = rw.at("weights").at("v").get<double>();
  const double w_raw = rw.at("weights").at("w").get<double>();

  std::map<std::string, double> out;
  out[names::kC1] = c1;
  out[names::kC2] = c2;
  out[names::kC3] = c3;
  if (aq.enabled) {
    const double raq = air_quality_reward(outside_airflow_cfm, vmin_total_cfm, aq.lambda);
    const double s = u_raw + v_raw + w_raw + aq.weight;
    if (!(s > 0)) fail<ConfigError>("reward weights must not all be zero");
    out[names::kAirQuality] = raq;
    out[names::kReward] =
        (u_raw * c1 + v_raw * c2 + w_raw * c3 + aq.weight * (raq - 1.0)) / s;
  } else {
    const RewardWeights w = RewardWeights::normalized(u_raw, v_raw, w_raw);
    out[names::kReward] = reward_3c(c1, c2, c3, w);
  }
  return out;
}

}  // namespace sbsim
