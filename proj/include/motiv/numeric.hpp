#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace motiv {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Rounds to `digits` significant decimal digits.
double round_significant(double v, int digits);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Zero-pads all-digit codes shorter than 5 characters; returns nullopt for
/// anything that is not a 5-digit code afterwards.
std::optional<std::string> normalize_fips(std::string_view s);

}  // namespace motiv
