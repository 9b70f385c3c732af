#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "sbsim/core.hpp"

namespace sbsim {

// Unix time in whole seconds, UTC. Timestep alignment is integral so
// sub-second resolution is never needed.
using UnixTime = std::int64_t;

namespace detail {
// Days-from-civil / civil-from-days (Howard Hinnant's algorithms).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}
}  // namespace detail

inline UnixTime make_time(int year, unsigned month, unsigned day, unsigned hour = 0, unsigned minute = 0,
                          unsigned second = 0) {
  return detail::days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

// "2023-07-10T00:00:00Z"
inline std::string format_rfc3339(UnixTime t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  int y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                static_cast<long long>(sod / 3600), static_cast<long long>((sod / 60) % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

inline UnixTime parse_rfc3339(std::string_view s) {
  int y, h, mi, se;
  unsigned mo, d;
  char tz;
  if (std::sscanf(std::string(s).c_str(), "%d-%u-%uT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &se, &tz) != 7 ||
      (tz != 'Z' && tz != 'z')) {
    fail<ParseError>("invalid RFC-3339 UTC timestamp: '", std::string(s), "'");
  }
  return make_time(y, mo, d, h, mi, se);
}

// "YYYY-MM-DD" -> midnight UTC
inline UnixTime parse_date(std::string_view s) {
  int y;
  unsigned mo, d;
  if (std::sscanf(std::string(s).c_str(), "%d-%u-%u", &y, &mo, &d) != 3) {
    fail<ParseError>("invalid date: '", std::string(s), "'");
  }
  return make_time(y, mo, d);
}

// "HH:MM" -> seconds after midnight
inline int parse_time_of_day(std::string_view s) {
  int h, m;
  if (std::sscanf(std::string(s).c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 24 || m < 0 || m > 59) {
    fail<ParseError>("invalid time of day: '", std::string(s), "'");
  }
  return h * 3600 + m * 60;
}

// 0 = Monday ... 6 = Sunday
inline int weekday(UnixTime t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) days -= 1;
  return static_cast<int>(((days % 7) + 7 + 3) % 7);  // 1970-01-01 was a Thursday
}

inline bool is_weekend(UnixTime t) { return weekday(t) >= 5; }

inline int seconds_of_day(UnixTime t) {
  std::int64_t sod = t % 86400;
  if (sod < 0) sod += 86400;
  return static_cast<int>(sod);
}

inline UnixTime midnight_of(UnixTime t) { return t - seconds_of_day(t); }

}  // namespace sbsim
