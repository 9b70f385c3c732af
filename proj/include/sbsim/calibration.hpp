#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/core.hpp"
#include "sbsim/env.hpp"
#include "sbsim/episode.hpp"
#include "sbsim/simulator.hpp"

namespace sbsim {

// Temporal-spatial mean absolute error over N steps and Z zones.
inline double ts_mae(const std::vector<std::vector<double>>& t_real,
                     const std::vector<std::vector<double>>& t_sim) {
  if (t_real.size() != t_sim.size() || t_real.empty()) {
    fail<ValidationError>("ts_mae: trajectory lengths differ or are empty (", t_real.size(), " vs ",
                          t_sim.size(), ")");
  }
  const std::size_t zones = t_real.front().size();
  if (zones == 0) fail<ValidationError>("ts_mae: no zones");
  double total = 0.0;
  for (std::size_t t = 0; t < t_real.size(); ++t) {
    if (t_real[t].size() != zones || t_sim[t].size() != zones) {
      fail<ValidationError>("ts_mae: ragged trajectories at step ", t);
    }
    double step_sum = 0.0;
    for (std::size_t z = 0; z < zones; ++z) step_sum += std::abs(t_real[t][z] - t_sim[t][z]);
    total += step_sum / static_cast<double>(zones);
  }
  return total / static_cast<double>(t_real.size());
}

struct ReplayResult {
  std::vector<std::string> zone_ids;
  std::vector<std::vector<double>> t_real;  // [N][Z], rows 1..N of the episode
  std::vector<std::vector<double>> t_sim;   // [N][Z], simulated counterparts
  double error_c = 0.0;                     // ts_mae(t_real, t_sim)
};

// Replays a recorded episode through the simulator: zone CVs start at the
// zone's first recorded temperature, the remaining non-exterior cells take
// the nearest initialized value, and the recorded actions and weather drive
// N steps.
inline ReplayResult n_step_replay(const BuildingConfig& building, const EpisodeArchive& episode,
                                  int n_steps, std::uint64_t seed) {
  if (n_steps < 1) fail<ValidationError>("n_step_replay: need at least one step");
  if (episode.observations.steps() < n_steps + 1) {
    fail<ValidationError>("episode too short: ", episode.observations.steps(), " rows for ", n_steps,
                          " replay steps (need N+1 observations)");
  }
  const TimeseriesMatrix& obs = episode.observations;
  const int weather_col = obs.column(names::kWeather);
  if (weather_col < 0) fail<ValidationError>("episode lacks the outside-temperature column");

  ReplayResult out;
  std::vector<int> zone_cols;
  for (const ZoneConfig& z : building.zones) {
    const int col = obs.column(names::zone_temp(z.id));
    if (col < 0) fail<ValidationError>("episode lacks temperature column for zone '", z.id, "'");
    out.zone_ids.push_back(z.id);
    zone_cols.push_back(col);
  }
  if (zone_cols.empty()) fail<ValidationError>("building has no zones to replay");

  Simulator sim(building, seed);
  const double t_inf0 = obs.rows[0][weather_col];

  // Initialize: zone cells from the starting observation, then flood the
  // remaining non-exterior cells with the nearest assigned value.
  std::vector<Grid2D<double>> temps;
  for (int fl = 0; fl < building.num_floors(); ++fl) {
    const Grid2D<CellClass>& cells = building.floor_grids[fl];
    Grid2D<double> t(cells.rows(), cells.cols(), t_inf0);
    Grid2D<std::uint8_t> assigned(cells.rows(), cells.cols(), 0);
    std::deque<Cell> queue;
    for (std::size_t zi = 0; zi < building.zones.size(); ++zi) {
      const ZoneConfig& z = building.zones[zi];
      if (z.floor != fl) continue;
      const double v = obs.rows[0][zone_cols[zi]];
      for (const Cell& c : z.cells) {
        t(c.row, c.col) = v;
        assigned(c.row, c.col) = 1;
        queue.push_back(c);
      }
    }
    while (!queue.empty()) {
      const Cell cur = queue.front();
      queue.pop_front();
      for (int d = 0; d < 4; ++d) {
        const int nr = cur.row + kDirDRow[d];
        const int nc = cur.col + kDirDCol[d];
        if (!cells.in_bounds(nr, nc) || assigned(nr, nc)) continue;
        if (is_exterior(cells(nr, nc))) continue;
        t(nr, nc) = t(cur.row, cur.col);
        assigned(nr, nc) = 1;
        queue.push_back({nr, nc});
      }
    }
    temps.push_back(std::move(t));
  }
  sim.set_temperatures(temps, obs.timestamps[0]);

  std::optional<ReplayPolicy> policy;
  if (building.has_plant()) policy.emplace(episode);

  out.t_real.reserve(n_steps);
  out.t_sim.reserve(n_steps);
  for (int s = 0; s < n_steps; ++s) {
    const SetpointVector action = policy ? policy->action_at(s) : SetpointVector{};
    sim.step(action, obs.rows[s][weather_col]);
    const auto zone_temps = sim.zone_mean_temps();
    std::vector<double> sim_row, real_row;
    for (std::size_t zi = 0; zi < out.zone_ids.size(); ++zi) {
      sim_row.push_back(zone_temps.at(out.zone_ids[zi]));
      real_row.push_back(obs.rows[s + 1][zone_cols[zi]]);
    }
    out.t_sim.push_back(std::move(sim_row));
    out.t_real.push_back(std::move(real_row));
  }
  out.error_c = ts_mae(out.t_real, out.t_sim);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter bounds and optimizers

constexpr int kNumTunables = 9;
using ParamVector = std::array<double, kNumTunables>;

inline const std::array<const char*, kNumTunables>& tunable_names() {
  static const std::array<const char*, kNumTunables> n = {
      "convection_coefficient",       "exterior_cv_conductivity",      "exterior_cv_density",
      "exterior_cv_heat_capacity",    "interior_wall_cv_conductivity", "interior_wall_cv_density",
      "interior_wall_cv_heat_capacity", "swap_prob",                   "swap_radius"};
  return n;
}

struct ParamBounds {
  ParamVector min;
  ParamVector max;

  // Defaults follow the published tuning table.
  ParamBounds()
      : min{5.0, 0.01, 0.0, 100.0, 5.0, 0.5, 500.0, 0.0, 0.0},
        max{800.0, 1.0, 3000.0, 2500.0, 800.0, 1500.0, 1500.0, 1.0, 50.0} {}

  void validate() const {
    for (int i = 0; i < kNumTunables; ++i) {
      if (min[i] > max[i]) {
        fail<ValidationError>("parameter bound ", tunable_names()[i], ": min ", min[i], " > max ", max[i]);
      }
    }
  }

  ParamVector clamp(const ParamVector& p) const {
    ParamVector out;
    for (int i = 0; i < kNumTunables; ++i) out[i] = std::clamp(p[i], min[i], max[i]);
    return out;
  }

  bool contains(const ParamVector& p) const {
    for (int i = 0; i < kNumTunables; ++i) {
      if (p[i] < min[i] || p[i] > max[i]) return false;
    }
    return true;
  }
};

inline MaterialParams materialize(const ParamVector& p) {
  MaterialParams m;
  m.convection_coefficient = p[0];
  m.exterior_cv_conductivity = p[1];
  m.exterior_cv_density = p[2];
  m.exterior_cv_heat_capacity = p[3];
  m.interior_wall_cv_conductivity = p[4];
  m.interior_wall_cv_density = p[5];
  m.interior_wall_cv_heat_capacity = p[6];
  m.swap_prob = p[7];
  m.swap_radius = std::round(p[8]);
  return m;
}

inline ParamVector params_of(const MaterialParams& m) {
  return {m.convection_coefficient,
          m.exterior_cv_conductivity,
          m.exterior_cv_density,
          m.exterior_cv_heat_capacity,
          m.interior_wall_cv_conductivity,
          m.interior_wall_cv_density,
          m.interior_wall_cv_heat_capacity,
          m.swap_prob,
          m.swap_radius};
}

// Round-trips a suggestion through MaterialParams so logged parameters match
// what the simulator actually used (integer swap radius).
inline ParamVector materialize_roundtrip(const ParamVector& p) { return params_of(materialize(p)); }

// Black-box optimizer over the bounded parameter box. Implementations must
// be deterministic given their seed; observe() is called exactly once per
// suggest(), in order.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual ParamVector suggest() = 0;
  virtual void observe(const ParamVector& params, double error) = 0;
  // Sequential refiners return 1 to force one-at-a-time evaluation.
  virtual int parallelism_hint(int requested) { return requested; }
};

class RandomSearchOptimizer : public Optimizer {
 public:
  RandomSearchOptimizer(const ParamBounds& bounds, std::uint64_t seed) : bounds_(bounds), rng_(seed) {
    bounds_.validate();
  }

  ParamVector suggest() override {
    ParamVector p;
    for (int i = 0; i < kNumTunables; ++i) p[i] = rng_.uniform(bounds_.min[i], bounds_.max[i]);
    return p;
  }

  void observe(const ParamVector& params, double error) override {
    if (error < best_error_) {
      best_error_ = error;
      best_ = params;
    }
  }

  double best_error() const { return best_error_; }
  const ParamVector& best() const { return best_; }

 private:
  ParamBounds bounds_;
  Rng rng_;
  ParamVector best_{};
  double best_error_ = std::numeric_limits<double>::infinity();
};

// Uniform random warmup, then cycling coordinate-wise golden-section
// refinement around the best point found so far.
class GoldenSectionOptimizer : public Optimizer {
 public:
  GoldenSectionOptimizer(const ParamBounds& bounds, std::uint64_t seed, int warmup_trials)
      : bounds_(bounds), random_(bounds, seed), warmup_(warmup_trials) {}

  ParamVector suggest() override {
    ++issued_;
    if (issued_ <= warmup_) return random_.suggest();
    if (!line_active_) start_line();
    pending_is_x1_ = next_probe_is_x1_;
    ParamVector p = best_;
    p[coord_] = pending_is_x1_ ? x1_ : x2_;
    return bounds_.clamp(p);
  }

  void observe(const ParamVector& params, double error) override {
    ++observed_;
    if (error < best_error_) {
      best_error_ = error;
      best_ = params;
    }
    if (observed_ <= warmup_) {
      random_.observe(params, error);
      if (observed_ == warmup_ && !std::isfinite(best_error_)) {
        best_ = bounds_.clamp(ParamVector{});  // no finite warmup trial
      }
      return;
    }
    if (pending_is_x1_) {
      f1_ = error;
    } else {
      f2_ = error;
    }
    if (first_pair_) {
      // Both probes of the fresh bracket must be scored before narrowing.
      if (pending_is_x1_) {
        next_probe_is_x1_ = false;
        first_pair_ = false;
        return;
      }
      first_pair_ = false;
    }
    narrow();
  }

  // Random warmup runs in parallel; the refinement is strictly sequential.
  int parallelism_hint(int requested) override {
    if (issued_ < warmup_) return std::min(requested, warmup_ - issued_);
    return 1;
  }

  const ParamVector& best() const { return best_; }
  double best_error() const { return best_error_; }

 private:
  static constexpr double kInvPhi = 0.6180339887498949;

  void start_line() {
    a_ = bounds_.min[coord_];
    b_ = bounds_.max[coord_];
    x1_ = b_ - (b_ - a_) * kInvPhi;
    x2_ = a_ + (b_ - a_) * kInvPhi;
    f1_ = f2_ = std::numeric_limits<double>::quiet_NaN();
    first_pair_ = true;
    next_probe_is_x1_ = true;
    iterations_left_ = 10;
    line_active_ = true;
  }

  void narrow() {
    if (f1_ <= f2_) {
      b_ = x2_;
      x2_ = x1_;
      f2_ = f1_;
      x1_ = b_ - (b_ - a_) * kInvPhi;
      next_probe_is_x1_ = true;
    } else {
      a_ = x1_;
      x1_ = x2_;
      f1_ = f2_;
      x2_ = a_ + (b_ - a_) * kInvPhi;
      next_probe_is_x1_ = false;
    }
    if (--iterations_left_ <= 0) {
      line_active_ = false;
      coord_ = (coord_ + 1) % kNumTunables;
    }
  }

  ParamBounds bounds_;
  RandomSearchOptimizer random_;
  int warmup_;
  int issued_ = 0;
  int observed_ = 0;
  ParamVector best_{};
  double best_error_ = std::numeric_limits<double>::infinity();

  int coord_ = 0;
  bool line_active_ = false;
  int iterations_left_ = 0;
  double a_ = 0, b_ = 0, x1_ = 0, x2_ = 0, f1_ = 0, f2_ = 0;
  bool first_pair_ = true;
  bool next_probe_is_x1_ = true;
  bool pending_is_x1_ = true;
};

inline std::unique_ptr<Optimizer> make_optimizer(const std::string& name, const ParamBounds& bounds,
                                                 std::uint64_t seed, int budget) {
  if (name == "random") return std::make_unique<RandomSearchOptimizer>(bounds, seed);
  if (name == "golden") {
    return std::make_unique<GoldenSectionOptimizer>(bounds, seed, std::max(1, (budget * 3) / 5));
  }
  fail<ConfigError>("unknown optimizer '", name, "' (expected 'random' or 'golden')");
}

// ---------------------------------------------------------------------------
// Calibration driver

struct TrialResult {
  int trial = -1;
  ParamVector params{};
  double train_error_c = std::numeric_limits<double>::infinity();
  std::optional<double> val_error_c;
  double seconds = 0.0;
};

struct CalibrationReport {
  std::vector<TrialResult> trials;
  TrialResult best;
};

struct CalibrationOptions {
  int budget = 100;
  std::string optimizer = "random";
  int workers = 1;
  std::uint64_t seed = 0;
  ParamBounds bounds;
  // Validation replays run only for trials that improve the best train
  // error; other rows keep an unset val error.
};

inline CalibrationReport calibrate(const BuildingConfig& building, const EpisodeArchive& train_episode,
                                   const CalibrationOptions& opts,
                                   const EpisodeArchive* val_episode = nullptr) {
  if (opts.budget < 1) fail<ValidationError>("calibration budget must be >= 1");
  opts.bounds.validate();
  auto optimizer = make_optimizer(opts.optimizer, opts.bounds, derive_seed(opts.seed, "optimizer"),
                                  opts.budget);
  const int train_steps = train_episode.observations.steps() - 1;
  if (train_steps < 1) fail<ValidationError>("training episode too short for replay");

  auto evaluate = [&](const ParamVector& p, std::uint64_t trial_seed, const EpisodeArchive& ep,
                      int steps) -> double {
    BuildingConfig candidate = building;
    candidate.materials = materialize(p);
    try {
      return n_step_replay(candidate, ep, steps, trial_seed).error_c;
    } catch (const SolverError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  CalibrationReport report;
  report.trials.reserve(opts.budget);
  double best_train = std::numeric_limits<double>::infinity();

  int issued = 0;
  while (issued < opts.budget) {
    const int batch =
        std::min(opts.budget - issued, std::max(1, optimizer->parallelism_hint(std::max(1, opts.workers))));
    std::vector<TrialResult> batch_results(batch);
    std::vector<ParamVector> suggestions(batch);
    for (int b = 0; b < batch; ++b) {
      suggestions[b] = materialize_roundtrip(optimizer->suggest());
      batch_results[b].trial = issued + b;
      batch_results[b].params = suggestions[b];
    }
    auto run_one = [&](int b) {
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t trial_seed = derive_seed(opts.seed, "trial", batch_results[b].trial);
      batch_results[b].train_error_c = evaluate(suggestions[b], trial_seed, train_episode, train_steps);
      batch_results[b].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    if (batch == 1) {
      run_one(0);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      const int n_threads = std::min(batch, std::max(1, opts.workers));
      for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const int b = next.fetch_add(1);
            if (b >= batch) return;
            run_one(b);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    for (int b = 0; b < batch; ++b) {
      optimizer->observe(suggestions[b], batch_results[b].train_error_c);
      if (val_episode != nullptr && batch_results[b].train_error_c < best_train) {
        const std::uint64_t trial_seed = derive_seed(opts.seed, "trial", batch_results[b].trial);
        batch_results[b].val_error_c =
            evaluate(suggestions[b], trial_seed, *val_episode, val_episode->observations.steps() - 1);
      }
      if (batch_results[b].train_error_c < best_train) best_train = batch_results[b].train_error_c;
      report.trials.push_back(batch_results[b]);
    }
    issued += batch;
  }

  const TrialResult* best = nullptr;
  for (const TrialResult& t : report.trials) {
    if (best == nullptr || t.train_error_c < best->train_error_c) best = &t;
  }
  report.best = *best;
  return report;
}

inline void write_trials_csv(const CalibrationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail<ConfigError>("cannot open '", path, "' for writing");
  out << "trial";
  for (const char* n : tunable_names()) out << ',' << n;
  out << ",train_error_c,val_error_c,seconds\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
  };
  for (const TrialResult& t : report.trials) {
    out << t.trial;
    for (double p : t.params) {
      out << ',';
      emit(p);
    }
    out << ',';
    emit(t.train_error_c);
    out << ',';
    if (t.val_error_c) emit(*t.val_error_c);
    out << ',';
    emit(t.seconds);
    out << '\n';
  }
}

}  // namespace sbsim
