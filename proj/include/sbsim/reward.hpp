#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "sbsim/core.hpp"
#include "sbsim/hvac.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ComfortParams {
  double lambda_per_c = 2.0;  // stiffness
  double delta_c = 1.0;       // offset where loss = 0.5

  void validate() const {
    if (!(lambda_per_c > 0)) fail<ValidationError>("comfort lambda must be > 0");
    if (!(delta_c > 0)) fail<ValidationError>("comfort delta must be > 0");
  }
};

// Zero inside setpoints or when unoccupied; a logistic ramp of the deviation
// beyond each setpoint, hitting 0.5 at deviation = delta.
inline double comfort_loss(double zone_temp_c, double heating_setpoint_c, double cooling_setpoint_c,
                           double occupants, const ComfortParams& p) {
  if (!(heating_setpoint_c < cooling_setpoint_c)) {
    fail<ValidationError>("comfort_loss: heating setpoint must be below cooling setpoint");
  }
  p.validate();
  if (occupants <= 0.0) return 0.0;
  if (zone_temp_c >= heating_setpoint_c && zone_temp_c <= cooling_setpoint_c) return 0.0;
  const double deviation = zone_temp_c < heating_setpoint_c ? heating_setpoint_c - zone_temp_c
                                                            : zone_temp_c - cooling_setpoint_c;
  return logistic(p.lambda_per_c * (deviation - p.delta_c));
}

// C1 = -(mean zone comfort loss), in [-1, 0].
inline double building_comfort(const std::vector<double>& zone_losses) {
  if (zone_losses.empty()) return 0.0;
  double sum = 0.0;
  for (double l : zone_losses) sum += l;
  return -sum / static_cast<double>(zone_losses.size());
}

struct TariffAndEmissions {
  double electricity_price_per_kwh = 0.15;   // p_e
  double gas_price_per_kwh = 0.03;           // p_g
  double electricity_kgc_per_kwh = 0.4;      // r_e (may vary over time)
  double gas_kgc_per_kwh = 0.18;             // r_g

  void validate() const {
    if (electricity_price_per_kwh < 0 || gas_price_per_kwh < 0 || electricity_kgc_per_kwh < 0 ||
        gas_kgc_per_kwh < 0) {
      fail<ValidationError>("tariff/emission rates must be >= 0");
    }
  }
};

namespace detail {
inline double normalized_cost(const DevicePower& p, double electric_rate, double gas_rate) {
  const double actual = electric_rate * (p.refrigeration_w + p.blower_w + p.pump_w) + gas_rate * p.gas_w;
  const double max =
      electric_rate * (p.refrigeration_max_w + p.blower_max_w + p.pump_max_w) + gas_rate * p.gas_max_w;
  if (!(max > 0.0)) fail<ConfigError>("energy/carbon cost: all rated maxima are zero");
  return -actual / max;
}
}  // namespace detail

// C2: actual over maximum energy cost for the interval (the interval length
// cancels, so power substitutes for energy).
inline double energy_cost(const DevicePower& power, const TariffAndEmissions& t) {
  t.validate();
  return detail::normalized_cost(power, t.electricity_price_per_kwh, t.gas_price_per_kwh);
}

// C3: same ratio with emission rates in place of prices.
inline double carbon_cost(const DevicePower& power, const TariffAndEmissions& t) {
  t.validate();
  return detail::normalized_cost(power, t.electricity_kgc_per_kwh, t.gas_kgc_per_kwh);
}

struct RewardWeights {
  double comfort = 1.0 / 3.0;  // u
  double energy = 1.0 / 3.0;   // v
  double carbon = 1.0 / 3.0;   // w

  static RewardWeights normalized(double u, double v, double w) {
    if (u < 0 || v < 0 || w < 0) fail<ValidationError>("reward weights must be >= 0");
    const double s = u + v + w;
    if (!(s > 0)) fail<ValidationError>("reward weights must not all be zero");
    return {u / s, v / s, w / s};
  }
};

inline double reward_3c(double c1, double c2, double c3, const RewardWeights& w) {
  return w.comfort * c1 + w.energy * c2 + w.carbon * c3;
}

struct AirQualityParams {
  bool enabled = false;
  double weight = 0.0;                 // q, normalized together with u,v,w when enabled
  double rate_per_person_cfm = 5.0;    // R_p (office default)
  double rate_per_area_cfm_ft2 = 0.06; // R_a (office default)
  double lambda = 1.0;                 // stiffness

  void validate() const {
    if (rate_per_person_cfm < 0 || rate_per_area_cfm_ft2 < 0) {
      fail<ValidationError>("air-quality rates must be >= 0");
    }
    if (weight < 0) fail<ValidationError>("air-quality weight must be >= 0");
  }
};

// ASHRAE 62.1 minimum outside airflow.
inline double min_outside_airflow_cfm(double persons, double area_ft2, const AirQualityParams& p) {
  p.validate();
  return p.rate_per_person_cfm * persons + p.rate_per_area_cfm_ft2 * area_ft2;
}

// Logistic air-quality reward in [0, 1], 0.5 where outside airflow meets the
// minimum standard.
inline double air_quality_reward(double outside_airflow_cfm, double min_airflow_cfm, double lambda) {
  return logistic(lambda * (outside_airflow_cfm - min_airflow_cfm));
}

// Stochastic occupancy: k_max occupants per zone arrive inside the arrival
// window and leave inside the departure window, each step a Bernoulli trial
// with P = 2/n so the expected transition sits at the window midpoint;
// stragglers transition at the window's final step. Zero on weekends and
// holidays.
struct OccupancyParams {
  double max_occupants = 0.0;
  int arrival_start_s = 8 * 3600;   // seconds after midnight
  int arrival_end_s = 9 * 3600;
  int departure_start_s = 17 * 3600;
  int departure_end_s = 18 * 3600;

  void validate() const {
    if (max_occupants < 0) fail<ValidationError>("max_occupants must be >= 0");
    if (arrival_start_s >= arrival_end_s) fail<ValidationError>("arrival window must be non-empty");
    if (departure_start_s >= departure_end_s) fail<ValidationError>("departure window must be non-empty");
    if (arrival_end_s > departure_start_s) fail<ValidationError>("arrival window must precede departure window");
  }
};

struct Calendar {
  std::set<UnixTime> holidays;  // midnights, UTC

  bool is_workday(UnixTime t) const {
    if (is_weekend(t)) return false;
    return holidays.count(midnight_of(t)) == 0;
  }
};

class OccupancySimulator {
 public:
  OccupancySimulator() = default;
  OccupancySimulator(OccupancyParams params, Calendar calendar, std::uint64_t seed)
      : params_(params), calendar_(std::move(calendar)), rng_(seed) {
    params_.validate();
    occupants_.assign(static_cast<std::size_t>(std::llround(params_.max_occupants)), State::NotArrived);
  }

  // Mean headcount over the step starting at `t` with duration dt_s.
  double step(UnixTime t, double dt_s) {
    const UnixTime day = midnight_of(t);
    if (day != current_day_) {
      current_day_ = day;
      std::fill(occupants_.begin(), occupants_.end(), State::NotArrived);
    }
    if (!calendar_.is_workday(t)) return 0.0;

    const int sod = seconds_of_day(t);
    const int sod_end = sod + static_cast<int>(dt_s);
    advance_window(sod, sod_end, params_.arrival_start_s, params_.arrival_end_s, State::NotArrived,
                   State::Present);
    advance_window(sod, sod_end, params_.departure_start_s, params_.departure_end_s, State::Present,
                   State::Departed);
    double count = 0.0;
    for (State s : occupants_) count += s == State::Present ? 1.0 : 0.0;
    return count;
  }

 private:
  enum class State { NotArrived, Present, Departed };

  void advance_window(int sod, int sod_end, int win_start, int win_end, State from, State to) {
    if (sod_end <= win_start || sod >= win_end) return;
    const int n_steps = std::max(1, (win_end - win_start) / std::max(1, sod_end - sod));
    const double p = std::min(1.0, 2.0 / static_cast<double>(n_steps));
    const bool final_step = sod_end >= win_end;
    for (State& s : occupants_) {
      if (s != from) continue;
      if (final_step || rng_.bernoulli(p)) s = to;
    }
  }

  OccupancyParams params_;
  Calendar calendar_;
  Rng rng_;
  std::vector<State> occupants_;
  UnixTime current_day_ = -1;
};

}  // namespace sbsim
