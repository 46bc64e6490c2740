#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "klm/error.hpp"

namespace klm {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt ipow(const BigInt& base, unsigned exponent) {
  return boost::multiprecision::pow(base, exponent);
}

inline BigInt ipow(std::int64_t base, unsigned exponent) { return ipow(BigInt(base), exponent); }

inline std::string to_decimal(const BigInt& x) { return x.str(); }

inline BigInt from_decimal(const std::string& s) {
  if (s.empty()) fail(ErrorCode::InvalidInput, "empty decimal string");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) fail(ErrorCode::InvalidInput, "bad decimal string '" + s + "'");
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') fail(ErrorCode::InvalidInput, "bad decimal string '" + s + "'");
  return BigInt(s);
}

// Floor division and the matching nonnegative remainder.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline BigInt mod_floor(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += (m < 0 ? -m : m);
  return r;
}

inline BigInt abs(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }

}  // namespace klm
