#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/episode.hpp"
#include "sbsim/reward.hpp"
#include "sbsim/simulator.hpp"

namespace sbsim {

// Appendix-style histogram observation: 1 °C bins over [12, 30) °C,
// out-of-range temperatures land in the end bins, normalized to sum 1.
constexpr int kHistogramBins = 18;
constexpr double kHistogramLow = 12.0;

inline std::array<double, kHistogramBins> observation_histogram(const std::vector<double>& zone_temps) {
  std::array<double, kHistogramBins> bins{};
  if (zone_temps.empty()) return bins;
  for (double t : zone_temps) {
    int b = static_cast<int>(std::floor(t - kHistogramLow));
    b = std::clamp(b, 0, kHistogramBins - 1);
    bins[b] += 1.0;
  }
  for (double& b : bins) b /= static_cast<double>(zone_temps.size());
  return bins;
}

struct Observation {
  UnixTime timestamp = 0;
  std::vector<std::string> names;
  std::vector<double> values;

  double at(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return values[i];
    }
    fail<ValidationError>("observation has no field '", name, "'");
  }
};

struct StepInfo {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double air_quality = 0.0;
  bool action_clamped = false;
  double unmet_heating_w = 0.0;
  double unmet_cooling_w = 0.0;
  int fd_sweeps = 0;
  double max_delta_c = 0.0;
  std::string error;  // non-empty on a terminal solver failure
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Time-varying tariff/emission rates; constant unless a CSV is configured.
class TariffSeries {
 public:
  TariffSeries() = default;
  TariffSeries(const TariffAndEmissions& constant, const std::string& csv_path) : constant_(constant) {
    if (csv_path.empty()) return;
    std::ifstream in(csv_path);
    if (!in) fail<ConfigError>("tariff csv '", csv_path, "' not readable");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.rfind("timestamp", 0) == 0) continue;
      std::vector<std::string> parts;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        parts.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (parts.size() != 5) fail<ParseError>("tariff csv: expected 5 columns, got ", parts.size());
      TariffAndEmissions t;
      t.electricity_price_per_kwh = std::stod(parts[1]);
      t.gas_price_per_kwh = std::stod(parts[2]);
      t.electricity_kgc_per_kwh = std::stod(parts[3]);
      t.gas_kgc_per_kwh = std::stod(parts[4]);
      series_.emplace_back(parse_rfc3339(parts[0]), t);
    }
  }

  TariffAndEmissions at(UnixTime t) const {
    TariffAndEmissions out = constant_;
    for (const auto& [ts, v] : series_) {
      if (ts > t) break;
      out = v;
    }
    return out;
  }

 private:
  TariffAndEmissions constant_;
  std::vector<std::pair<UnixTime, TariffAndEmissions>> series_;
};

// The interactive RL environment: composes the simulator, stochastic
// occupancy, and the 3C reward, and accumulates the episode archive.
class Environment {
 public:
  explicit Environment(const BuildingConfig& config)
      : config_(config), weather_(config.weather), tariffs_(config.reward.tariff, config.reward.tariff_csv) {
    config_.validate();
    if (!config_.has_plant()) {
      fail<ConfigError>("environment needs at least one VAV device; plant-free buildings are replay-only");
    }
  }

  Observation reset(std::uint64_t seed) {
    seed_ = seed;
    sim_ = std::make_unique<Simulator>(config_, seed);
    start_time_ = parse_rfc3339(config_.environment.start_time);
    sim_->reset(config_.environment.initial_temp_c, start_time_);
    sim_->seed_shuffle(derive_seed(seed, "air_shuffle"));
    calendar_ = config_.calendar();
    occupancy_.clear();
    const auto& zones = sim_->zone_map().zones();
    for (std::size_t i = 0; i < zones.size(); ++i) {
      const ZoneConfig& zc = config_.zones[i];
      occupancy_.push_back(zc.occupancy.max_occupants > 0
                               ? OccupancySimulator(zc.occupancy, calendar_, derive_seed(seed, "occupancy", i))
                               : OccupancySimulator());
      last_occupancy_[zc.id] = 0.0;
    }
    step_count_ = 0;
    episode_ = EpisodeArchive{};
    episode_.metadata = make_episode_metadata(config_);
    episode_.metadata["seed"] = seed;
    episode_.metadata["start_time"] = config_.environment.start_time;
    init_matrix_names();
    last_plant_ = PlantResult{};
    return observe();
  }

  // Observation of the current state (what the policy sees before acting).
  Observation observe() const {
    Observation obs;
    obs.timestamp = current_time();
    obs.names = episode_.observations.names;
    obs.values = observation_row();
    return obs;
  }

  StepResult step(const SetpointVector& action_in) {
    if (!sim_) fail<ValidationError>("step() before reset()");
    StepResult result;
    const UnixTime t0 = current_time();
    const SetpointVector action = config_.action_bounds.clamp(action_in);
    result.info.action_clamped = !config_.action_bounds.contains(action_in);

    const std::vector<double> obs_before = observation_row();
    const double outside = weather_.at(t0);

    // Active zone setpoints: schedule band plus the optional occupant
    // feedback nudge.
    std::map<std::string, ZoneSetpoints> active_setpoints;
    for (const ZoneConfig& z : config_.zones) {
      ZoneSetpoints sp = z.setpoints.at(t0);
      if (comfort_feedback_) sp = comfort_feedback_(z.id, sp, t0);
      active_setpoints[z.id] = sp;
    }

    SimStepInfo sim_info;
    try {
      sim_info = sim_->step(action, outside, kDefaultEpsilonC, &active_setpoints);
    } catch (const SolverError& e) {
      result.info.error = e.what();
      result.done = true;
      result.observation = observe();
      return result;
    }
    last_plant_ = sim_info.plant;
    result.info.fd_sweeps = sim_info.fd_sweeps;
    result.info.max_delta_c = sim_info.max_delta_c;
    result.info.unmet_heating_w = sim_info.plant.boiler.unmet_load_w;
    result.info.unmet_cooling_w = sim_info.plant.chiller.unmet_load_w;

    // Occupancy over the interval, then the 3C reward on end-of-step temps.
    const auto zone_temps = sim_->zone_mean_temps();
    const auto& zones = sim_->zone_map().zones();
    std::vector<double> losses;
    double vmin_cfm = 0.0;
    const AirQualityParams& aq = config_.reward.air_quality;
    for (std::size_t i = 0; i < zones.size(); ++i) {
      const ZoneConfig& zc = config_.zones[i];
      const double k = zc.occupancy.max_occupants > 0 ? occupancy_[i].step(t0, config_.timestep_s) : 0.0;
      last_occupancy_[zc.id] = k;
      const ZoneSetpoints& active = active_setpoints.at(zc.id);
      losses.push_back(comfort_loss(zone_temps.at(zc.id), active.heating_c, active.cooling_c, k,
                                    config_.reward.comfort));
      if (aq.enabled) {
        vmin_cfm += min_outside_airflow_cfm(k, zones[i].area_m2 * 10.7639, aq);
      }
    }
    const TariffAndEmissions rates = tariffs_.at(t0);
    result.info.c1 = building_comfort(losses);
    result.info.c2 = energy_cost(last_plant_.power, rates);
    result.info.c3 = carbon_cost(last_plant_.power, rates);
    if (aq.enabled) {
      result.info.air_quality =
          air_quality_reward(last_plant_.airflow.outside_airflow_cfm, vmin_cfm, aq.lambda);
      const double s =
          config_.reward.weight_comfort + config_.reward.weight_energy + config_.reward.weight_carbon + aq.weight;
      result.reward = (config_.reward.weight_comfort * result.info.c1 +
                       config_.reward.weight_energy * result.info.c2 +
                       config_.reward.weight_carbon * result.info.c3 +
                       aq.weight * (result.info.air_quality - 1.0)) /
                      s;
    } else {
      result.reward = reward_3c(result.info.c1, result.info.c2, result.info.c3, config_.reward.weights());
    }

    append_archive_rows(t0, obs_before, action, rates, zone_temps, active_setpoints, result);

    ++step_count_;
    result.done = step_count_ >= config_.environment.horizon_steps;
    result.observation = observe();
    return result;
  }

  const EpisodeArchive& episode() const { return episode_; }
  int steps_taken() const { return step_count_; }
  const Simulator& simulator() const { return *sim_; }
  UnixTime current_time() const { return sim_ ? sim_->time() : start_time_; }

  // Live occupant feedback ("too hot"/"too cold") as a per-zone setpoint
  // nudge applied to the scheduled band. Disabled unless set.
  using ComfortFeedbackHook = std::function<ZoneSetpoints(const std::string&, ZoneSetpoints, UnixTime)>;
  void set_comfort_feedback(ComfortFeedbackHook hook) { comfort_feedback_ = std::move(hook); }

  std::vector<double> zone_temperature_vector() const {
    std::vector<double> out;
    const auto temps = sim_->zone_mean_temps();
    for (const ZoneConfig& z : config_.zones) out.push_back(temps.at(z.id));
    return out;
  }

 private:
  void init_matrix_names() {
    auto& obs = episode_.observations.names;
    obs.clear();
    for (const ZoneConfig& z : config_.zones) obs.push_back(names::zone_temp(z.id));
    for (const DeviceInfo& d : sim_->layout().devices()) {
      for (const std::string& f : d.observable_fields) obs.push_back(f);
    }
    obs.push_back(names::kWeather);
    if (config_.environment.observation_histogram) {
      for (int b = 0; b < kHistogramBins; ++b) {
        obs.push_back("histogram/bin_" + std::to_string(static_cast<int>(kHistogramLow) + b));
      }
    }

    auto& act = episode_.actions.names;
    act.clear();
    for (const DeviceInfo& d : sim_->layout().devices()) {
      for (const std::string& f : d.action_fields) act.push_back(f);
    }

    auto& info = episode_.reward_info.names;
    info.clear();
    for (const ZoneConfig& z : config_.zones) {
      info.push_back(names::zone_temp(z.id));
      info.push_back(names::zone_heating_sp(z.id));
      info.push_back(names::zone_cooling_sp(z.id));
      info.push_back(names::zone_airflow(z.id));
      info.push_back(names::zone_occupancy(z.id));
    }
    for (const DeviceInfo& d : sim_->layout().devices()) {
      if (d.type == DeviceType::AHU) {
        info.push_back(names::ahu_blower(d.id));
        info.push_back(names::ahu_refrigeration(d.id));
        info.push_back(names::ahu_outside_airflow(d.id));
      } else if (d.type == DeviceType::Boiler) {
        info.push_back(names::boiler_pump(d.id));
        info.push_back(names::boiler_gas(d.id));
      }
    }
    info.push_back(names::kPriceElectricity);
    info.push_back(names::kPriceGas);
    info.push_back(names::kCarbonElectricity);
    info.push_back(names::kCarbonGas);

    auto& resp = episode_.reward_response.names;
    resp.clear();
    resp.push_back(names::kReward);
    resp.push_back(names::kC1);
    resp.push_back(names::kC2);
    resp.push_back(names::kC3);
    if (config_.reward.air_quality.enabled) resp.push_back(names::kAirQuality);
  }

  std::vector<double> observation_row() const {
    std::vector<double> row;
    const auto temps = sim_->zone_mean_temps();
    std::vector<double> zone_temps;
    for (const ZoneConfig& z : config_.zones) {
      zone_temps.push_back(temps.at(z.id));
      row.push_back(temps.at(z.id));
    }
    for (const DeviceInfo& d : sim_->layout().devices()) {
      switch (d.type) {
        case DeviceType::VAV: {
          const auto it = last_plant_.vav_results.find(d.id);
          const VavResult vr = it != last_plant_.vav_results.end() ? it->second : VavResult{};
          row.push_back(vr.airflow_kg_s);
          row.push_back(vr.reheat_power_w);
          break;
        }
        case DeviceType::AHU:
          row.push_back(last_plant_.ahu.fan_power_w);
          row.push_back(last_plant_.ahu.outside_airflow_cfm);
          row.push_back(last_plant_.ahu.mixed_air_temp_c);
          break;
        case DeviceType::Boiler:
          row.push_back(last_plant_.boiler.gas_power_w);
          row.push_back(last_plant_.boiler.pump_power_w);
          break;
        case DeviceType::Chiller:
          row.push_back(last_plant_.chiller.electrical_power_w);
          break;
        case DeviceType::Meter:
          row.push_back(last_plant_.power.refrigeration_w + last_plant_.power.blower_w +
                        last_plant_.power.pump_w);
          row.push_back(last_plant_.power.gas_w);
          break;
      }
    }
    row.push_back(weather_.at(current_time()));
    if (config_.environment.observation_histogram) {
      const auto hist = observation_histogram(zone_temps);
      row.insert(row.end(), hist.begin(), hist.end());
    }
    return row;
  }

  void append_archive_rows(UnixTime t0, const std::vector<double>& obs_before, const SetpointVector& action,
                           const TariffAndEmissions& rates, const std::map<std::string, double>& zone_temps,
                           const std::map<std::string, ZoneSetpoints>& active_setpoints,
                           StepResult& result) {
    episode_.observations.append(t0, obs_before);

    std::vector<double> act_row;
    for (const DeviceInfo& d : sim_->layout().devices()) {
      for (const std::string& f : d.action_fields) {
        (void)f;
        act_row.push_back(d.type == DeviceType::Boiler ? action.supply_water_temp_c
                                                       : action.supply_air_temp_c);
      }
    }
    episode_.actions.append(t0, std::move(act_row));

    std::vector<double> info_row;
    for (const ZoneConfig& z : config_.zones) {
      const ZoneSetpoints& active = active_setpoints.at(z.id);
      info_row.push_back(zone_temps.at(z.id));
      info_row.push_back(active.heating_c);
      info_row.push_back(active.cooling_c);
      const auto af = last_plant_.airflow.zone_airflow_kg_s.find(z.id);
      info_row.push_back(af != last_plant_.airflow.zone_airflow_kg_s.end() ? af->second : 0.0);
      info_row.push_back(last_occupancy_.at(z.id));
    }
    for (const DeviceInfo& d : sim_->layout().devices()) {
      if (d.type == DeviceType::AHU) {
        info_row.push_back(last_plant_.power.blower_w);
        info_row.push_back(last_plant_.power.refrigeration_w);
        info_row.push_back(last_plant_.airflow.outside_airflow_cfm);
      } else if (d.type == DeviceType::Boiler) {
        info_row.push_back(last_plant_.power.pump_w);
        info_row.push_back(last_plant_.power.gas_w);
      }
    }
    info_row.push_back(rates.electricity_price_per_kwh);
    info_row.push_back(rates.gas_price_per_kwh);
    info_row.push_back(rates.electricity_kgc_per_kwh);
    info_row.push_back(rates.gas_kgc_per_kwh);
    episode_.reward_info.append(t0, std::move(info_row));

    std::vector<double> resp_row{result.reward, result.info.c1, result.info.c2, result.info.c3};
    if (config_.reward.air_quality.enabled) resp_row.push_back(result.info.air_quality);
    episode_.reward_response.append(t0, std::move(resp_row));
  }

  BuildingConfig config_;
  WeatherModel weather_;
  TariffSeries tariffs_;
  ComfortFeedbackHook comfort_feedback_;
  std::unique_ptr<Simulator> sim_;
  std::vector<OccupancySimulator> occupancy_;
  std::map<std::string, double> last_occupancy_;
  Calendar calendar_;
  PlantResult last_plant_;
  EpisodeArchive episode_;
  UnixTime start_time_ = 0;
  std::uint64_t seed_ = 0;
  int step_count_ = 0;
};

// ---------------------------------------------------------------------------
// Policies

class Policy {
 public:
  virtual ~Policy() = default;
  virtual SetpointVector act(UnixTime t, const Observation& obs) = 0;
};

class ConstantPolicy : public Policy {
 public:
  explicit ConstantPolicy(SetpointVector sp) : sp_(sp) {}
  SetpointVector act(UnixTime, const Observation&) override { return sp_; }

 private:
  SetpointVector sp_;
};

// Weekday/weekend schedule with an occupied band of hours.
class SchedulePolicy : public Policy {
 public:
  struct DayPlan {
    int occupied_start_s = 6 * 3600;
    int occupied_end_s = 18 * 3600;
    SetpointVector occupied{60.0, 16.0};
    SetpointVector unoccupied{40.0, 14.0};
  };

  SchedulePolicy(DayPlan weekday, DayPlan weekend) : weekday_(weekday), weekend_(weekend) {}

  SetpointVector act(UnixTime t, const Observation&) override {
    const DayPlan& plan = is_weekend(t) ? weekend_ : weekday_;
    const int sod = seconds_of_day(t);
    return (sod >= plan.occupied_start_s && sod < plan.occupied_end_s) ? plan.occupied : plan.unoccupied;
  }

 private:
  DayPlan weekday_;
  DayPlan weekend_;
};

// Replays the action matrix of a recorded episode.
class ReplayPolicy : public Policy {
 public:
  explicit ReplayPolicy(const EpisodeArchive& ep) : actions_(ep.actions) {
    for (int i = 0; i < static_cast<int>(actions_.names.size()); ++i) {
      const std::string& n = actions_.names[i];
      if (n.find("supply_water_temperature_setpoint") != std::string::npos) water_col_ = i;
      if (n.find("supply_air_temperature_setpoint") != std::string::npos) air_col_ = i;
    }
    if (water_col_ < 0 || air_col_ < 0) {
      fail<ValidationError>("episode action matrix lacks supply water/air setpoint columns");
    }
  }

  SetpointVector act(UnixTime, const Observation&) override {
    if (next_ >= actions_.steps()) fail<ValidationError>("replay policy exhausted at step ", next_);
    SetpointVector sp{actions_.rows[next_][water_col_], actions_.rows[next_][air_col_]};
    ++next_;
    return sp;
  }

  SetpointVector action_at(int t) const {
    return {actions_.rows[t][water_col_], actions_.rows[t][air_col_]};
  }

 private:
  TimeseriesMatrix actions_;
  int water_col_ = -1;
  int air_col_ = -1;
  int next_ = 0;
};

// JSON policy spec: {"type": "constant"|"schedule", ...}
inline std::unique_ptr<Policy> load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail<ConfigError>("policy file '", path, "' not readable");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail<ParseError>("policy '", path, "': ", e.what());
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    return std::make_unique<ConstantPolicy>(SetpointVector{
        j.at("supply_water_temp_c").get<double>(), j.at("supply_air_temp_c").get<double>()});
  }
  if (type == "schedule") {
    auto parse_plan = [](const json& p) {
      SchedulePolicy::DayPlan plan;
      plan.occupied_start_s = parse_time_of_day(p.at("occupied_start").get<std::string>());
      plan.occupied_end_s = parse_time_of_day(p.at("occupied_end").get<std::string>());
      plan.occupied = {p.at("occupied").at("supply_water_temp_c").get<double>(),
                       p.at("occupied").at("supply_air_temp_c").get<double>()};
      plan.unoccupied = {p.at("unoccupied").at("supply_water_temp_c").get<double>(),
                         p.at("unoccupied").at("supply_air_temp_c").get<double>()};
      return plan;
    };
    return std::make_unique<SchedulePolicy>(parse_plan(j.at("weekday")), parse_plan(j.at("weekend")));
  }
  fail<ConfigError>("unknown policy type '", type, "'");
}

// Runs a policy for `steps` environment steps and returns the archive.
inline EpisodeArchive run_episode(Environment& env, Policy& policy, int steps, std::uint64_t seed) {
  Observation obs = env.reset(seed);
  for (int s = 0; s < steps; ++s) {
    const SetpointVector action = policy.act(obs.timestamp, obs);
    const StepResult r = env.step(action);
    obs = r.observation;
    if (!r.info.error.empty()) fail<SolverError>(r.info.error);
  }
  return env.episode();
}

}  // namespace sbsim
