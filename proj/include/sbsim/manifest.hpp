#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsim/building.hpp"
#include "sbsim/core.hpp"
#include "sbsim/timeutil.hpp"

namespace sbsim {

constexpr const char* kSbsimVersion = "1.0.0";

// Job provenance record, written atomically when a CLI command finishes.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  UnixTime started = 0;
  UnixTime finished = 0;
  std::vector<std::string> outputs;

  void write(const std::string& path) const {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["version"] = kSbsimVersion;
    j["started"] = format_rfc3339(started);
    j["finished"] = format_rfc3339(finished);
    j["outputs"] = outputs;
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) fail<ConfigError>("cannot write manifest '", tmp, "'");
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
  }
};

inline UnixTime wall_clock_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace sbsim
