#include "kpkvb/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace kpkvb {

std::string format_number(double v, int digits) {
  if (v == 0.0) return "0";  // also folds -0
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf.data(), end};
}

double parse_double(std::string_view token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return v;
}

long long parse_integer(std::string_view token) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  return v;
}

}  // namespace kpkvb
