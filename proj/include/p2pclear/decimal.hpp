#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace p2pclear {

/// Exact rational number used for every price, money and index value.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Currency per kWh.
using Price = Rational;
/// Currency.
using Money = Rational;
/// Energy in watt-hours.
using Wh = std::int64_t;

inline constexpr Wh wh_per_kwh = 1000;

/// Money for `energy` Wh traded at `price` per kWh.
inline Money value_of(const Price& price, Wh energy) {
  return price * Rational(energy) / Rational(wh_per_kwh);
}

/// Parses a plain decimal literal such as "12", "12.15", "-0.5" or ".25".
/// Exponents, thousands separators and surrounding text are rejected.
inline std::optional<Rational> parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  Integer digits = 0;
  Integer scale = 1;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    any_digit = true;
    digits = digits * 10 + (c - '0');
    if (seen_point) scale *= 10;
  }
  if (!any_digit) return std::nullopt;
  Rational value(digits, scale);
  return negative ? Rational(-value) : value;
}

/// Renders `value` with exactly `places` fractional digits, rounding half away
/// from zero.
inline std::string format_fixed(const Rational& value, int places) {
  Integer pow10 = 1;
  for (int k = 0; k < places; ++k) pow10 *= 10;

  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;
  const Integer num = boost::multiprecision::numerator(magnitude) * pow10;
  const Integer den = boost::multiprecision::denominator(magnitude);
  Integer scaled = num / den;
  const Integer rem = num % den;
  if (rem * 2 >= den) scaled += 1;

  std::string digits = scaled.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), 1, '.');
  }
  if (negative && scaled != 0) digits.insert(0, 1, '-');
  return digits;
}

/// Shortest exact decimal rendering (at least one fractional digit) when the
/// value terminates in base ten; otherwise "numerator/denominator".
inline std::string format_exact(const Rational& value) {
  Integer den = boost::multiprecision::denominator(value);
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) {
    return boost::multiprecision::numerator(value).str() + "/" +
           boost::multiprecision::denominator(value).str();
  }
  return format_fixed(value, std::max({twos, fives, 1}));
}

}  // namespace p2pclear
