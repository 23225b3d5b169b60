#pragma once

// Exact rational arithmetic for heaviness values (P / D sums never touch
// floating point).

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

#include "msmr/model.hpp"

namespace msmr {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "3", "0.15", "-2.5" or "3/20" exactly.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational num = parse_rational(text.substr(0, slash));
    const Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw fail();
    return num / den;
  }
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  BigInt digits = 0;
  BigInt scale = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_point) scale *= 10;
      seen_digit = true;
    } else {
      throw fail();
    }
  }
  if (!seen_digit) throw fail();
  Rational r(digits, scale);
  return negative ? Rational(-r) : r;
}

inline BigInt floor_of(const Rational& r) {
  BigInt q = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
  if (r < 0 && Rational(q) != r) q -= 1;
  return q;
}

inline BigInt ceil_of(const Rational& r) {
  BigInt f = floor_of(r);
  return Rational(f) == r ? f : BigInt(f + 1);
}

/// Nearest integer, halves rounded up.
inline BigInt round_half_up(const Rational& r) { return floor_of(r + Rational(1, 2)); }

inline Time to_time(const BigInt& v) {
  if (v < 0 || v > BigInt(kTimeMax)) throw std::overflow_error("value outside the time range");
  return static_cast<Time>(v);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Fixed-point decimal rendering, truncated towards zero.
inline std::string to_decimal(const Rational& r, int places) {
  BigInt scale = 1;
  for (int p = 0; p < places; ++p) scale *= 10;
  const Rational mag = r < 0 ? Rational(-r) : r;
  const BigInt scaled = floor_of(mag * scale);
  std::string digits = scaled.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places))
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  return (r < 0 && scaled != 0 ? "-" : "") + digits;
}

}  // namespace msmr
