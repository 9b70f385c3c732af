#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbsim/building.hpp"
#include "support/synthetic.hpp"

using namespace sbsim;

#ifdef SBSIM_CLI_PATH

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SBSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes") {
  SECTION("--help succeeds") { CHECK(run_cli("--help") == 0); }
  SECTION("unknown flag is a usage error") { CHECK(run_cli("run --no-such-flag") == 2); }
  SECTION("missing subcommand is a usage error") { CHECK(run_cli("") == 2); }
  SECTION("missing building file is a validation error") {
    CHECK(run_cli("replay --building /nonexistent/b.json --episode /nonexistent/ep") == 3);
  }
  SECTION("malformed building config is a validation error") {
    const auto dir = std::filesystem::temp_directory_path() / "sbsim_cli_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK(run_cli("replay --building " + (dir / "bad.json").string() + " --episode x") == 3);
  }
}

TEST_CASE("cli writes a run manifest with the config fingerprint") {
  const auto dir = std::filesystem::temp_directory_path() / "sbsim_cli_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  testsupport::SyntheticSpec spec;
  BuildingConfig b = testsupport::make_building(spec);
  const std::string building = (dir / "b.json").string();
  save_building(b, building);
  json policy = {{"type", "constant"}, {"supply_water_temp_c", 55.0}, {"supply_air_temp_c", 15.0}};
  std::ofstream(dir / "p.json") << policy.dump();

  REQUIRE(run_cli("run --building " + building + " --policy " + (dir / "p.json").string() +
                  " --steps 3 --seed 4 --out " + (dir / "ep").string()) == 0);
  std::ifstream manifest(dir / "ep" / "manifest_run.json");
  REQUIRE(manifest.good());
  json mj;
  manifest >> mj;
  CHECK(mj.at("command") == "run");
  CHECK(mj.at("seed") == 4);
  char expected[32];
  std::snprintf(expected, sizeof expected, "%016llx",
                static_cast<unsigned long long>(file_fingerprint(building)));
  CHECK(mj.at("config_hash") == expected);
}

#endif  // SBSIM_CLI_PATH
