#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ttp {

// Tracker clocks are interpreted as Pakistan Standard Time: fixed UTC+5, no DST.
inline constexpr std::int64_t kLocalUtcOffsetS = 5 * 3600;

struct LocalTime {
  int year = 1970;
  int month = 1;        // 1-12
  int day = 1;          // 1-31
  int hour = 0;
  int minute = 0;
  int second = 0;
  int day_of_week = 4;  // Monday = 1 ... Sunday = 7
  int seconds_of_day() const { return hour * 3600 + minute * 60 + second; }
};

LocalTime to_local(std::int64_t epoch_s);

// Inverse of to_local for a wall-clock time in the local zone.
std::int64_t from_local(int year, int month, int day, int hour = 0, int minute = 0,
                        int second = 0);

// Accepts plain epoch seconds ("1559531730") or ISO-8601
// ("2019-06-03T08:15:30", "2019-06-03 08:15:30", optional fraction, optional "Z"
// or "+HH:MM" offset). Without an explicit offset the local zone applies.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// "2019-06-03T08:15:30+05:00"
std::string format_local_iso(std::int64_t epoch_s);

}  // namespace ttp
