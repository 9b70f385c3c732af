#include <catch2/catch_amalgamated.hpp>

#include "sbsim/env.hpp"
#include "support/synthetic.hpp"

using namespace sbsim;

namespace {

BuildingConfig small_building() {
  testsupport::SyntheticSpec spec;
  spec.partition_cols = {12};
  spec.max_occupants = 4;
  return testsupport::make_building(spec);
}

}  // namespace

TEST_CASE("observation histogram") {
  SECTION("single temperature is a one-hot bin") {
    const auto h = observation_histogram({20.5});
    for (int b = 0; b < kHistogramBins; ++b) REQUIRE(h[b] == (b == 8 ? 1.0 : 0.0));  // [20,21)
  }
  SECTION("out-of-range temperatures clamp to the end bins") {
    const auto h = observation_histogram({11.0, 31.0});
    CHECK(h[0] == 0.5);
    CHECK(h[kHistogramBins - 1] == 0.5);
  }
  SECTION("uniform coverage gives a uniform vector") {
    std::vector<double> temps;
    for (int b = 0; b < kHistogramBins; ++b) temps.push_back(12.5 + b);
    const auto h = observation_histogram(temps);
    for (double v : h) REQUIRE(v == Catch::Approx(1.0 / kHistogramBins));
  }
  SECTION("sums to one and is permutation invariant") {
    Rng rng(6);
    std::vector<double> temps;
    for (int i = 0; i < 20; ++i) temps.push_back(rng.uniform(5.0, 35.0));
    auto h1 = observation_histogram(temps);
    std::reverse(temps.begin(), temps.end());
    auto h2 = observation_histogram(temps);
    CHECK(h1 == h2);
    double sum = 0;
    for (double v : h1) sum += v;
    CHECK(sum == Catch::Approx(1.0));
  }
  SECTION("no zones yields a zero vector") {
    const auto h = observation_histogram({});
    for (double v : h) REQUIRE(v == 0.0);
  }
}

TEST_CASE("reset is deterministic and declares a stable observation width") {
  BuildingConfig b = small_building();
  Environment env1(b), env2(b);
  const Observation o1 = env1.reset(99);
  const Observation o2 = env2.reset(99);
  CHECK(o1.names == o2.names);
  CHECK(o1.values == o2.values);

  // M = zone temps + device observables + weather.
  std::size_t expected = b.zones.size() + 1;
  for (const DeviceInfo& d : b.device_layout().devices()) expected += d.observable_fields.size();
  CHECK(o1.names.size() == expected);

  // Reset after stepping reinitializes the state.
  env1.step({60.0, 15.0});
  const Observation o3 = env1.reset(99);
  CHECK(o3.values == o1.values);
}

TEST_CASE("histogram columns appear when enabled") {
  BuildingConfig b = small_building();
  b.environment.observation_histogram = true;
  Environment env(b);
  const Observation o = env.reset(1);
  std::size_t expected = b.zones.size() + 1 + kHistogramBins;
  for (const DeviceInfo& d : b.device_layout().devices()) expected += d.observable_fields.size();
  CHECK(o.names.size() == expected);
  double sum = 0.0;
  for (std::size_t i = 0; i < o.names.size(); ++i) {
    if (o.names[i].rfind("histogram/", 0) == 0) sum += o.values[i];
  }
  CHECK(sum == Catch::Approx(1.0));
}

TEST_CASE("identical seeds and actions give identical trajectories") {
  BuildingConfig b = small_building();
  b.materials.swap_prob = 0.05;
  b.materials.swap_radius = 3;
  Environment env1(b), env2(b);
  env1.reset(7);
  env2.reset(7);
  for (int s = 0; s < 20; ++s) {
    const SetpointVector a{40.0 + s, 12.0 + (s % 5)};
    const StepResult r1 = env1.step(a);
    const StepResult r2 = env2.step(a);
    REQUIRE(r1.reward == r2.reward);
    REQUIRE(r1.observation.values == r2.observation.values);
  }
  CHECK(env1.episode().observations == env2.episode().observations);
  CHECK(env1.episode().reward_response == env2.episode().reward_response);
}

TEST_CASE("done flags at the configured horizon") {
  BuildingConfig b = small_building();
  b.environment.horizon_steps = 5;
  Environment env(b);
  env.reset(1);
  for (int s = 0; s < 4; ++s) {
    CHECK_FALSE(env.step({55.0, 15.0}).done);
  }
  CHECK(env.step({55.0, 15.0}).done);
}

TEST_CASE("out-of-bounds actions are clamped and reported") {
  BuildingConfig b = small_building();
  Environment env(b);
  env.reset(1);
  const StepResult r = env.step({150.0, -5.0});
  CHECK(r.info.action_clamped);
  int water_col = -1, air_col = -1;
  for (int i = 0; i < static_cast<int>(env.episode().actions.names.size()); ++i) {
    if (env.episode().actions.names[i].find("supply_water") != std::string::npos) water_col = i;
    if (env.episode().actions.names[i].find("supply_air") != std::string::npos) air_col = i;
  }
  CHECK(env.episode().actions.rows[0][water_col] == b.action_bounds.supply_water_max_c);
  CHECK(env.episode().actions.rows[0][air_col] == b.action_bounds.supply_air_min_c);
  const StepResult r2 = env.step({60.0, 15.0});
  CHECK_FALSE(r2.info.action_clamped);
}

TEST_CASE("environment rewards are bounded and components populated") {
  BuildingConfig b = small_building();
  Environment env(b);
  env.reset(3);
  for (int s = 0; s < 30; ++s) {
    const StepResult r = env.step({70.0, 18.0});
    REQUIRE(r.reward <= 0.0);
    REQUIRE(r.reward >= -1.0);
    REQUIRE(r.info.c1 <= 0.0);
    REQUIRE(r.info.c1 >= -1.0);
    REQUIRE(r.info.c2 <= 0.0);
    REQUIRE(r.info.c2 >= -1.0);
    REQUIRE(r.info.c3 <= 0.0);
    REQUIRE(r.info.c3 >= -1.0);
    REQUIRE(r.info.fd_sweeps >= 1);
    REQUIRE(r.info.max_delta_c <= kDefaultEpsilonC);
  }
}

TEST_CASE("policies") {
  SECTION("constant policy always returns the same vector") {
    ConstantPolicy p({61.0, 13.5});
    const Observation obs;
    for (int i = 0; i < 5; ++i) {
      const SetpointVector a = p.act(make_time(2023, 7, 10) + i * 300, obs);
      REQUIRE(a.supply_water_temp_c == 61.0);
      REQUIRE(a.supply_air_temp_c == 13.5);
    }
  }
  SECTION("schedule policy switches exactly at the configured boundary") {
    SchedulePolicy::DayPlan weekday;
    weekday.occupied_start_s = 6 * 3600;
    weekday.occupied_end_s = 18 * 3600;
    weekday.occupied = {65.0, 16.0};
    weekday.unoccupied = {40.0, 13.0};
    SchedulePolicy::DayPlan weekend = weekday;
    weekend.occupied = {41.0, 13.5};
    SchedulePolicy p(weekday, weekend);
    const Observation obs;
    const UnixTime monday = make_time(2023, 7, 10);
    CHECK(p.act(monday + 6 * 3600 - 300, obs).supply_water_temp_c == 40.0);
    CHECK(p.act(monday + 6 * 3600, obs).supply_water_temp_c == 65.0);
    CHECK(p.act(monday + 18 * 3600 - 300, obs).supply_water_temp_c == 65.0);
    CHECK(p.act(monday + 18 * 3600, obs).supply_water_temp_c == 40.0);
    const UnixTime saturday = make_time(2023, 7, 15);
    CHECK(p.act(saturday + 7 * 3600, obs).supply_water_temp_c == 41.0);
  }
  SECTION("replay policy reproduces its episode's action matrix") {
    BuildingConfig b = small_building();
    Environment env(b);
    SchedulePolicy::DayPlan plan;
    SchedulePolicy source(plan, plan);
    const EpisodeArchive ep = run_episode(env, source, 20, 5);
    ReplayPolicy replay(ep);
    int water_col = -1, air_col = -1;
    for (int i = 0; i < static_cast<int>(ep.actions.names.size()); ++i) {
      if (ep.actions.names[i].find("supply_water") != std::string::npos) water_col = i;
      if (ep.actions.names[i].find("supply_air") != std::string::npos) air_col = i;
    }
    REQUIRE(water_col >= 0);
    REQUIRE(air_col >= 0);
    const Observation obs;
    for (int t = 0; t < 20; ++t) {
      const SetpointVector a = replay.act(0, obs);
      REQUIRE(a.supply_water_temp_c == ep.actions.rows[t][water_col]);
      REQUIRE(a.supply_air_temp_c == ep.actions.rows[t][air_col]);
    }
  }
}

TEST_CASE("time-varying tariffs flow into reward info rows") {
  BuildingConfig b = small_building();
  const auto dir = std::filesystem::temp_directory_path() / "sbsim_tariff_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "tariff.csv";
  {
    std::ofstream out(csv);
    out << "timestamp,p_e,p_g,r_e,r_g\n";
    out << "2023-07-10T00:00:00Z,0.10,0.03,0.30,0.18\n";
    out << "2023-07-10T00:10:00Z,0.50,0.04,0.80,0.18\n";
  }
  b.reward.tariff_csv = csv.string();
  Environment env(b);
  env.reset(1);
  for (int s = 0; s < 4; ++s) env.step({55.0, 15.0});
  const TimeseriesMatrix& info = env.episode().reward_info;
  CHECK(info.at(0, names::kPriceElectricity) == 0.10);
  CHECK(info.at(1, names::kPriceElectricity) == 0.10);
  CHECK(info.at(2, names::kPriceElectricity) == 0.50);  // switch at 00:10
  CHECK(info.at(3, names::kCarbonElectricity) == 0.80);
  // Recompute still matches with the varying rates.
  for (int t = 0; t < 4; ++t) {
    for (const auto& [name, value] : recompute_reward(env.episode(), t)) {
      REQUIRE(env.episode().reward_response.at(t, name) == Catch::Approx(value).margin(1e-12));
    }
  }
}

TEST_CASE("occupant feedback nudges the active setpoints") {
  BuildingConfig b = small_building();
  Environment env(b);
  env.reset(2);
  env.set_comfort_feedback([](const std::string&, ZoneSetpoints sp, UnixTime) {
    sp.heating_c += 1.5;  // "too cold" pushes the heating setpoint up
    return sp;
  });
  env.step({55.0, 15.0});
  const TimeseriesMatrix& info = env.episode().reward_info;
  const std::string col = names::zone_heating_sp(b.zones[0].id);
  CHECK(info.at(0, col) ==
        Catch::Approx(b.zones[0].setpoints.at(parse_rfc3339(b.environment.start_time)).heating_c + 1.5));
}
