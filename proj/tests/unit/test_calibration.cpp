#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sbsim/calibration.hpp"
#include "support/synthetic.hpp"

using namespace sbsim;

TEST_CASE("ts_mae basics") {
  const std::vector<std::vector<double>> a{{20.0, 21.0}, {22.0, 23.0}};
  SECTION("identical trajectories score zero") { CHECK(ts_mae(a, a) == 0.0); }
  SECTION("constant offset scores the offset") {
    auto b = a;
    for (auto& row : b) {
      for (double& v : row) v += 1.0;
    }
    CHECK(ts_mae(a, b) == Catch::Approx(1.0));
  }
  SECTION("hand-summed example") {
    // diffs {0,1} and {2,3}: mean over zones then steps = (0.5 + 2.5)/2.
    const std::vector<std::vector<double>> real{{10.0, 10.0}, {10.0, 10.0}};
    const std::vector<std::vector<double>> sim{{10.0, 11.0}, {12.0, 13.0}};
    CHECK(ts_mae(real, sim) == Catch::Approx(1.5));
  }
  SECTION("shape mismatch is rejected") {
    CHECK_THROWS_AS(ts_mae(a, {{1.0, 2.0}}), ValidationError);
    CHECK_THROWS_AS(ts_mae(a, {{1.0}, {2.0}}), ValidationError);
  }
}

TEST_CASE("ts_mae is metric-like and permutation invariant") {
  Rng rng(55);
  for (int i = 0; i < 50; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const int z = static_cast<int>(rng.uniform_int(1, 5));
    std::vector<std::vector<double>> a(n, std::vector<double>(z));
    std::vector<std::vector<double>> b = a;
    for (int t = 0; t < n; ++t) {
      for (int j = 0; j < z; ++j) {
        a[t][j] = rng.uniform(10, 30);
        b[t][j] = rng.uniform(10, 30);
      }
    }
    const double e = ts_mae(a, b);
    REQUIRE(e >= 0.0);
    REQUIRE(ts_mae(b, a) == e);
    REQUIRE(ts_mae(a, a) == 0.0);

    // Simultaneous permutation of steps and zones in both arguments.
    std::vector<int> step_perm(n), zone_perm(z);
    for (int t = 0; t < n; ++t) step_perm[t] = t;
    for (int j = 0; j < z; ++j) zone_perm[j] = j;
    for (int t = n - 1; t > 0; --t) std::swap(step_perm[t], step_perm[rng.uniform_int(0, t)]);
    for (int j = z - 1; j > 0; --j) std::swap(zone_perm[j], zone_perm[rng.uniform_int(0, j)]);
    auto permute = [&](const std::vector<std::vector<double>>& m) {
      std::vector<std::vector<double>> out(n, std::vector<double>(z));
      for (int t = 0; t < n; ++t) {
        for (int j = 0; j < z; ++j) out[t][j] = m[step_perm[t]][zone_perm[j]];
      }
      return out;
    };
    REQUIRE(ts_mae(permute(a), permute(b)) == Catch::Approx(e).margin(1e-12));
  }
}

namespace {

BuildingConfig twin_building(double swap_prob = 0.0) {
  testsupport::SyntheticSpec spec;
  spec.rows = 14;
  spec.cols = 18;
  spec.partition_cols = {9};
  spec.max_occupants = 0;  // occupancy does not move temperatures
  spec.materials.swap_prob = swap_prob;
  spec.materials.swap_radius = swap_prob > 0 ? 3 : 0;
  spec.weather_type = "sine";
  return testsupport::make_building(spec);
}

EpisodeArchive generate_episode(const BuildingConfig& b, int steps, std::uint64_t seed) {
  Environment env(b);
  SchedulePolicy::DayPlan weekday;
  weekday.occupied = {60.0, 16.0};
  weekday.unoccupied = {45.0, 13.0};
  SchedulePolicy policy(weekday, weekday);
  return run_episode(env, policy, steps, seed);
}

}  // namespace

TEST_CASE("replay of a device-free building in equilibrium returns the initial temps") {
  testsupport::SyntheticSpec spec;
  spec.with_devices = false;
  spec.max_occupants = 0;
  spec.initial_temp_c = 18.0;
  spec.weather_type = "constant";
  spec.weather_constant_c = 18.0;
  BuildingConfig b = testsupport::make_building(spec);

  // Build a one-step synthetic archive by hand: uniform temps equal to the
  // outside temperature.
  EpisodeArchive ep;
  ep.metadata = make_episode_metadata(b);
  for (const ZoneConfig& z : b.zones) ep.observations.names.push_back(names::zone_temp(z.id));
  ep.observations.names.push_back(names::kWeather);
  const UnixTime t0 = make_time(2023, 7, 10);
  for (int t = 0; t < 2; ++t) {
    std::vector<double> row(b.zones.size(), 18.0);
    row.push_back(18.0);
    ep.observations.append(t0 + t * 300, row);
    ep.actions.append(t0 + t * 300, {});
    ep.reward_info.append(t0 + t * 300, {});
    ep.reward_response.append(t0 + t * 300, {});
  }

  const ReplayResult r = n_step_replay(b, ep, 1, 0);
  for (double v : r.t_sim[0]) REQUIRE(v == Catch::Approx(18.0).margin(1e-12));
  CHECK(r.error_c == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("self-replay with identical parameters is exact") {
  BuildingConfig b = twin_building(0.0);
  const EpisodeArchive ep = generate_episode(b, 40, 2023);
  const ReplayResult r = n_step_replay(b, ep, 39, 2023);
  CHECK(r.error_c <= 1e-12);
}

TEST_CASE("self-replay holds for random small buildings without shuffle") {
  Rng rng(88);
  for (int i = 0; i < 3; ++i) {
    testsupport::SyntheticSpec spec;
    spec.rows = static_cast<int>(rng.uniform_int(10, 16));
    spec.cols = static_cast<int>(rng.uniform_int(10, 20));
    spec.max_occupants = 0;
    BuildingConfig b = testsupport::make_building(spec);
    const EpisodeArchive ep = generate_episode(b, 20, 50 + i);
    REQUIRE(n_step_replay(b, ep, 19, 50 + i).error_c <= 1e-12);
  }
}

TEST_CASE("shuffle seeds spread replays within a noise band") {
  BuildingConfig b = twin_building(0.3);
  const EpisodeArchive ep = generate_episode(b, 40, 1234);
  std::vector<double> errors;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    errors.push_back(n_step_replay(b, ep, 39, seed).error_c);
  }
  const double lo = *std::min_element(errors.begin(), errors.end());
  const double hi = *std::max_element(errors.begin(), errors.end());
  CHECK(lo > 0.0);     // different shuffle draws diverge
  CHECK(hi < 1.0);     // but stay within a sane band
  CHECK(hi <= 10.0 * std::max(lo, 1e-6));
}

TEST_CASE("optimizer suggestions stay within bounds") {
  ParamBounds bounds;
  SECTION("fresh optimizers suggest in-bounds points") {
    for (const char* name : {"random", "golden"}) {
      auto opt = make_optimizer(name, bounds, 5, 100);
      const ParamVector p = opt->suggest();
      REQUIRE(bounds.contains(p));
    }
  }
  SECTION("suggestions remain in bounds after uninformative observations") {
    auto opt = make_optimizer("golden", bounds, 5, 20);
    for (int i = 0; i < 40; ++i) {
      const ParamVector p = opt->suggest();
      REQUIRE(bounds.contains(p));
      opt->observe(p, 1.0);  // all-equal history
    }
  }
}

TEST_CASE("random search on a 1D quadratic finds the minimizer region") {
  ParamBounds bounds;
  // Collapse everything except the convection coefficient.
  for (int i = 1; i < kNumTunables; ++i) bounds.min[i] = bounds.max[i] = bounds.min[i];
  const double target = 312.0;
  RandomSearchOptimizer opt(bounds, 99);
  double best_x = 0, best_f = 1e300;
  for (int t = 0; t < 200; ++t) {
    const ParamVector p = opt.suggest();
    const double f = (p[0] - target) * (p[0] - target);
    opt.observe(p, f);
    if (f < best_f) {
      best_f = f;
      best_x = p[0];
    }
  }
  CHECK(std::abs(best_x - target) <= 0.05 * (bounds.max[0] - bounds.min[0]));
}

TEST_CASE("golden refinement closes in on a 1D quadratic") {
  ParamBounds bounds;
  for (int i = 1; i < kNumTunables; ++i) bounds.max[i] = bounds.min[i];
  const double target = 312.0;
  GoldenSectionOptimizer opt(bounds, 7, 30);
  double best_x = 0, best_f = 1e300;
  for (int t = 0; t < 200; ++t) {
    const ParamVector p = opt.suggest();
    const double f = (p[0] - target) * (p[0] - target);
    opt.observe(p, f);
    if (f < best_f) {
      best_f = f;
      best_x = p[0];
    }
  }
  CHECK(std::abs(best_x - target) <= 0.01 * (bounds.max[0] - bounds.min[0]));
}

TEST_CASE("calibrate with a collapsed box returns that point") {
  BuildingConfig b = twin_building();
  const EpisodeArchive ep = generate_episode(b, 10, 77);
  CalibrationOptions opts;
  opts.budget = 1;
  const ParamVector fixed = params_of(b.materials);
  opts.bounds.min = fixed;
  opts.bounds.max = fixed;
  const CalibrationReport report = calibrate(b, ep, opts);
  REQUIRE(report.trials.size() == 1);
  CHECK(report.best.params == fixed);
  CHECK(report.best.train_error_c <= 1e-12);  // self-replay at the true params
}

TEST_CASE("calibration trial logs are deterministic for a fixed seed") {
  BuildingConfig b = twin_building();
  const EpisodeArchive ep = generate_episode(b, 10, 31);
  CalibrationOptions opts;
  opts.budget = 8;
  opts.optimizer = "random";
  opts.seed = 5;
  opts.workers = 2;
  const CalibrationReport r1 = calibrate(b, ep, opts);
  const CalibrationReport r2 = calibrate(b, ep, opts);
  REQUIRE(r1.trials.size() == r2.trials.size());
  for (std::size_t i = 0; i < r1.trials.size(); ++i) {
    REQUIRE(r1.trials[i].trial == r2.trials[i].trial);
    REQUIRE(r1.trials[i].params == r2.trials[i].params);
    REQUIRE(r1.trials[i].train_error_c == r2.trials[i].train_error_c);
  }
}

TEST_CASE("calibrate never returns out-of-bounds parameters") {
  BuildingConfig b = twin_building();
  const EpisodeArchive ep = generate_episode(b, 10, 31);
  CalibrationOptions opts;
  opts.budget = 12;
  opts.optimizer = "golden";
  opts.seed = 9;
  const CalibrationReport report = calibrate(b, ep, opts);
  for (const TrialResult& t : report.trials) {
    REQUIRE(opts.bounds.contains(t.params));
  }
  REQUIRE(opts.bounds.contains(report.best.params));
}

TEST_CASE("missing zone or weather columns are replay errors") {
  BuildingConfig b = twin_building();
  EpisodeArchive ep = generate_episode(b, 10, 1);
  SECTION("too short for the requested horizon") {
    CHECK_THROWS_AS(n_step_replay(b, ep, 10, 1), ValidationError);
  }
  SECTION("weather column removed") {
    EpisodeArchive broken = ep;
    const int col = broken.observations.column(names::kWeather);
    broken.observations.names.erase(broken.observations.names.begin() + col);
    for (auto& row : broken.observations.rows) row.erase(row.begin() + col);
    CHECK_THROWS_AS(n_step_replay(b, broken, 5, 1), ValidationError);
  }
}
