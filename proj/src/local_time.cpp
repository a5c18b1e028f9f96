#include "ttp/local_time.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace ttp {

namespace {

using namespace std::chrono;

std::int64_t days_from_civil(int y, int m, int d) {
  return sys_days{year{y} / month{static_cast<unsigned>(m)} / day{static_cast<unsigned>(d)}}
      .time_since_epoch()
      .count();
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

LocalTime to_local(std::int64_t epoch_s) {
  const std::int64_t local = epoch_s + kLocalUtcOffsetS;
  std::int64_t days = local / 86400;
  std::int64_t rem = local % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const sys_days sd{std::chrono::days{days}};
  const year_month_day ymd{sd};
  const weekday wd{sd};
  LocalTime t;
  t.year = static_cast<int>(ymd.year());
  t.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  t.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  t.hour = static_cast<int>(rem / 3600);
  t.minute = static_cast<int>((rem % 3600) / 60);
  t.second = static_cast<int>(rem % 60);
  t.day_of_week = static_cast<int>(wd.iso_encoding());
  return t;
}

std::int64_t from_local(int y, int m, int d, int hh, int mm, int ss) {
  return days_from_civil(y, m, d) * 86400 + hh * 3600 + mm * 60 + ss - kLocalUtcOffsetS;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;

  bool all_digits = true;
  for (char c : s) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(c));
  if (all_digits) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
  }

  // YYYY-MM-DD[T| ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM]
  int y, mo, d, hh, mi, ss;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, mo) || !read_int(s, 8, 2, d) ||
      !read_int(s, 11, 2, hh) || !read_int(s, 14, 2, mi) || !read_int(s, 17, 2, ss))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mi > 59 || ss > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;
  }
  std::int64_t offset = kLocalUtcOffsetS;
  if (pos < s.size()) {
    const char z = s[pos];
    if (z == 'Z' && pos + 1 == s.size()) {
      offset = 0;
    } else if ((z == '+' || z == '-') && s.size() - pos == 6 && s[pos + 3] == ':') {
      int oh, om;
      if (!read_int(s, pos + 1, 2, oh) || !read_int(s, pos + 4, 2, om)) return std::nullopt;
      offset = (oh * 3600 + om * 60) * (z == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }
  return days_from_civil(y, mo, d) * 86400 + hh * 3600 + mi * 60 + ss - offset;
}

std::string format_local_iso(std::int64_t epoch_s) {
  const LocalTime t = to_local(epoch_s);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d+05:00", t.year, t.month, t.day,
                t.hour, t.minute, t.second);
  return buf;
}

}  // namespace ttp
