#include "motiv/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "motiv/errors.hpp"

namespace motiv {

namespace {

int read_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  if (pos + len > s.size()) throw InputError("malformed time '" + std::string(whole) + "'");
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw InputError("malformed time '" + std::string(whole) + "'");
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c, std::string_view whole) {
  if (pos >= s.size() || s[pos] != c) throw InputError("malformed time '" + std::string(whole) + "'");
}

DayNumber civil_days(int y, int m, int d, std::string_view whole) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw InputError("invalid date '" + std::string(whole) + "'");
  return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

DayNumber parse_date(std::string_view s) {
  if (s.size() != 10) throw InputError("malformed date '" + std::string(s) + "'");
  const int y = read_int(s, 0, 4, s);
  expect(s, 4, '-', s);
  const int m = read_int(s, 5, 2, s);
  expect(s, 7, '-', s);
  const int d = read_int(s, 8, 2, s);
  return civil_days(y, m, d, s);
}

Timestamp parse_timestamp(std::string_view s) {
  if (s.size() < 19) throw InputError("malformed timestamp '" + std::string(s) + "'");
  const DayNumber day = parse_date(s.substr(0, 10));
  if (s[10] != 'T' && s[10] != ' ') throw InputError("malformed timestamp '" + std::string(s) + "'");
  const int hh = read_int(s, 11, 2, s);
  expect(s, 13, ':', s);
  const int mm = read_int(s, 14, 2, s);
  expect(s, 16, ':', s);
  const int ss = read_int(s, 17, 2, s);
  if (hh > 23 || mm > 59 || ss > 60) throw InputError("invalid timestamp '" + std::string(s) + "'");
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  const std::string_view zone = s.substr(pos);
  if (zone != "Z" && zone != "+00:00" && zone != "+0000") {
    throw InputError("timestamp must be UTC: '" + std::string(s) + "'");
  }
  return day * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_date(DayNumber d) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{d}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  const DayNumber d = day_of(t);
  const std::int64_t rem = t - d * kSecondsPerDay;
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(rem / 3600),
                static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return format_date(d) + buf;
}

}  // namespace motiv
