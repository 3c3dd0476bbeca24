#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace motiv {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
/// Days since the Unix epoch.
using DayNumber = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|+00:00)`; fractional seconds are
/// truncated. Throws InputError.
Timestamp parse_timestamp(std::string_view s);
/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_timestamp(Timestamp t);

/// Parses `YYYY-MM-DD`. Throws InputError.
DayNumber parse_date(std::string_view s);
std::string format_date(DayNumber d);

constexpr DayNumber day_of(Timestamp t) {
  return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

}  // namespace motiv
