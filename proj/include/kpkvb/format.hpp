#pragma once

#include <string>
#include <string_view>

namespace kpkvb {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest round-trip-free rendering with `digits` significant digits,
/// independent of the global locale.
std::string format_number(double v, int digits);

/// Strict locale-free parse of a whole token; throws std::invalid_argument.
double parse_double(std::string_view token);
long long parse_integer(std::string_view token);

}  // namespace kpkvb
