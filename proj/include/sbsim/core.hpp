#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sbsim {

// Error taxonomy maps onto the CLI exit codes: validation/config/parse -> 3,
// solver failures -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void format_into(std::ostringstream& os, T&& v, Rest&&... rest) {
  os << std::forward<T>(v);
  format_into(os, std::forward<Rest>(rest)...);
}
}  // namespace detail

template <typename E = Error, typename... Parts>
[[noreturn]] void fail(Parts&&... parts) {
  std::ostringstream os;
  detail::format_into(os, std::forward<Parts>(parts)...);
  throw E(os.str());
}

// FNV-1a, used for deriving subsystem seeds and for config fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// All randomness in the engine flows from one master seed; subsystems get
// independent streams keyed by name (and optionally an index).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view subsystem, std::uint64_t index = 0) {
  std::uint64_t h = fnv1a(subsystem, master ^ 0x9e3779b97f4a7c15ull);
  h ^= index + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

// mt19937_64 with portable helpers. std::uniform_*_distribution output is
// implementation-defined, so bounded draws are done from raw bits here.
class Rng {
 public:
  Rng() : gen_(0) {}
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(gen_());  // full range
    // Rejection to kill modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

enum class LogLevel { debug = 0, info = 1, quiet = 2 };

inline LogLevel& log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("SBSIM_LOG");
    if (env == nullptr) return LogLevel::quiet;
    std::string_view v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::quiet;
  }();
  return level;
}

template <typename... Parts>
void log_info(Parts&&... parts) {
  if (log_level() <= LogLevel::info) {
    std::ostringstream os;
    detail::format_into(os, std::forward<Parts>(parts)...);
    std::cerr << "[sbsim] " << os.str() << "\n";
  }
}

template <typename... Parts>
void log_debug(Parts&&... parts) {
  if (log_level() <= LogLevel::debug) {
    std::ostringstream os;
    detail::format_into(os, std::forward<Parts>(parts)...);
    std::cerr << "[sbsim:debug] " << os.str() << "\n";
  }
}

}  // namespace sbsim
