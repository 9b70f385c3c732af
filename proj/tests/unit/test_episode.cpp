#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbsim/env.hpp"
#include "sbsim/episode.hpp"
#include "support/synthetic.hpp"

using namespace sbsim;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto p = std::filesystem::temp_directory_path() / ("sbsim_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

EpisodeArchive random_archive(Rng& rng) {
  EpisodeArchive ep;
  ep.metadata = {{"version", 1}, {"building", "random"}};
  const int t_steps = static_cast<int>(rng.uniform_int(1, 20));
  const UnixTime start = make_time(2023, 7, 10);

  auto fill = [&](TimeseriesMatrix& m, const std::string& prefix, int cols) {
    for (int c = 0; c < cols; ++c) m.names.push_back(prefix + std::to_string(c));
    for (int t = 0; t < t_steps; ++t) {
      std::vector<double> row;
      for (int c = 0; c < cols; ++c) {
        // Mix plain and awkward magnitudes to stress the round trip.
        const double v = rng.bernoulli(0.2) ? rng.uniform(-1e-12, 1e-12)
                                            : rng.uniform(-1e6, 1e6) * std::pow(10, rng.uniform_int(-8, 8));
        row.push_back(v);
      }
      m.append(start + t * 300, std::move(row));
    }
  };
  fill(ep.observations, "obs_", static_cast<int>(rng.uniform_int(1, 8)));
  fill(ep.actions, "act_", 2);
  fill(ep.reward_info, "info_", static_cast<int>(rng.uniform_int(1, 6)));
  fill(ep.reward_response, "resp_", 4);
  return ep;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("episode archives round-trip bit-exactly") {
  Rng rng(321);
  const auto dir = temp_dir("roundtrip");
  for (int i = 0; i < 10; ++i) {
    const EpisodeArchive ep = random_archive(rng);
    const std::string path = (dir / ("ep" + std::to_string(i))).string();
    save_episode(ep, path);
    const EpisodeArchive loaded = load_episode(path);
    REQUIRE(loaded.observations == ep.observations);
    REQUIRE(loaded.actions == ep.actions);
    REQUIRE(loaded.reward_info == ep.reward_info);
    REQUIRE(loaded.reward_response == ep.reward_response);

    // Re-saving the loaded archive reproduces the files byte for byte.
    const std::string path2 = (dir / ("ep" + std::to_string(i) + "_resave")).string();
    save_episode(loaded, path2);
    for (const char* f : {"observations.csv", "actions.csv", "reward_info.csv", "reward_response.csv"}) {
      REQUIRE(slurp(std::filesystem::path(path) / f) == slurp(std::filesystem::path(path2) / f));
    }
  }
}

TEST_CASE("truncated episode files fail with a parse error") {
  Rng rng(11);
  const auto dir = temp_dir("truncated");
  EpisodeArchive ep = random_archive(rng);
  const std::string path = (dir / "ep").string();
  save_episode(ep, path);
  // Chop the observations matrix right after a comma, leaving a dangling
  // field on the final row.
  const auto obs_path = std::filesystem::path(path) / "observations.csv";
  std::string contents = slurp(obs_path);
  contents.resize(contents.rfind(',') + 1);
  std::ofstream(obs_path, std::ios::binary) << contents;
  CHECK_THROWS_AS(load_episode(path), ParseError);
}

TEST_CASE("step-count mismatch between matrices fails validation") {
  Rng rng(12);
  const auto dir = temp_dir("mismatch");
  EpisodeArchive ep = random_archive(rng);
  ep.actions.timestamps.push_back(ep.actions.timestamps.back() + 300);
  ep.actions.rows.push_back(ep.actions.rows.back());
  CHECK_THROWS_AS(ep.validate(), ValidationError);
}

TEST_CASE("version mismatch is rejected") {
  Rng rng(13);
  EpisodeArchive ep = random_archive(rng);
  ep.metadata["version"] = 2;
  CHECK_THROWS_AS(ep.validate(), ValidationError);
}

TEST_CASE("reward responses recompute from reward info") {
  testsupport::SyntheticSpec spec;
  spec.partition_cols = {12};
  spec.max_occupants = 8;
  BuildingConfig b = testsupport::make_building(spec);
  Environment env(b);
  ConstantPolicy policy({55.0, 14.0});
  const EpisodeArchive ep = run_episode(env, policy, 50, 4242);

  for (int t = 0; t < ep.reward_response.steps(); ++t) {
    const auto recomputed = recompute_reward(ep, t);
    for (const auto& [name, value] : recomputed) {
      REQUIRE(ep.reward_response.at(t, name) == Catch::Approx(value).margin(1e-9));
    }
  }
}

TEST_CASE("reward recompute covers the air-quality extension") {
  testsupport::SyntheticSpec spec;
  spec.max_occupants = 6;
  BuildingConfig b = testsupport::make_building(spec);
  b.reward.air_quality.enabled = true;
  b.reward.air_quality.weight = 0.2;
  Environment env(b);
  ConstantPolicy policy({55.0, 14.0});
  const EpisodeArchive ep = run_episode(env, policy, 30, 7);
  REQUIRE(ep.reward_response.column(names::kAirQuality) >= 0);
  for (int t = 0; t < ep.reward_response.steps(); ++t) {
    const auto recomputed = recompute_reward(ep, t);
    for (const auto& [name, value] : recomputed) {
      REQUIRE(ep.reward_response.at(t, name) == Catch::Approx(value).margin(1e-9));
    }
    REQUIRE(ep.reward_response.at(t, names::kReward) <= 1e-12);
    REQUIRE(ep.reward_response.at(t, names::kReward) >= -1.0 - 1e-12);
  }
}
