#pragma once

// Prime-field arithmetic and the small number-theoretic helpers shared by the
// moment formulas: deterministic primality, inverses, Jacobi symbols and
// double factorials.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "klm/bigint.hpp"
#include "klm/error.hpp"

namespace klm {

constexpr std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

constexpr std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exponent, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exponent > 0) {
    if (exponent & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exponent >>= 1;
  }
  return result;
}

/// Deterministic Miller-Rabin. The first twelve primes as witnesses are
/// exact for every n < 3.3e24, which covers all of uint64_t.
constexpr bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  constexpr std::array<std::uint64_t, 12> witnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (std::uint64_t w : witnesses) {
    if (n % w == 0) return n == w;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t w : witnesses) {
    std::uint64_t x = pow_mod(w, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// A rational prime, validated at construction.
class Prime {
 public:
  explicit Prime(std::uint64_t value) : value_(value) {
    if (!is_prime(value)) fail(ErrorCode::NotPrime, std::to_string(value) + " is not prime");
  }

  std::uint64_t value() const noexcept { return value_; }
  operator std::uint64_t() const noexcept { return value_; }

  friend bool operator==(Prime a, Prime b) noexcept { return a.value_ == b.value_; }

 private:
  std::uint64_t value_;
};

/// Element of F_p, always reduced into [0, p).
class FieldElem {
 public:
  FieldElem(Prime modulus, std::int64_t value) : modulus_(modulus) {
    const auto m = static_cast<std::int64_t>(modulus.value());
    std::int64_t r = value % m;
    if (r < 0) r += m;
    value_ = static_cast<std::uint64_t>(r);
  }

  Prime modulus() const noexcept { return modulus_; }
  std::uint64_t value() const noexcept { return value_; }
  bool is_zero() const noexcept { return value_ == 0; }

  friend bool operator==(const FieldElem& a, const FieldElem& b) noexcept {
    return a.modulus_ == b.modulus_ && a.value_ == b.value_;
  }

  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    if (!(a.modulus_ == b.modulus_)) fail(ErrorCode::ModulusMismatch, "field elements over different primes");
    return FieldElem(a.modulus_, static_cast<std::int64_t>(mul_mod(a.value_, b.value_, a.modulus_)));
  }

 private:
  Prime modulus_;
  std::uint64_t value_ = 0;
};

inline FieldElem mod_inverse(const FieldElem& x) {
  if (x.is_zero()) fail(ErrorCode::ZeroInverse, "zero has no inverse mod " + std::to_string(x.modulus().value()));
  // Extended Euclid on signed 128-bit to stay exact for any 64-bit modulus.
  __int128 r0 = x.modulus().value(), r1 = x.value();
  __int128 t0 = 0, t1 = 1;
  while (r1 != 0) {
    const __int128 q = r0 / r1;
    const __int128 r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    const __int128 t2 = t0 - q * t1;
    t0 = t1;
    t1 = t2;
  }
  const auto m = static_cast<__int128>(x.modulus().value());
  __int128 inv = t0 % m;
  if (inv < 0) inv += m;
  return FieldElem(x.modulus(), static_cast<std::int64_t>(inv));
}

/// Table of inverses 1..p-1 (index 0 unused) for the O(p) Kloosterman loops.
inline std::vector<std::uint32_t> inverse_table(std::uint32_t p) {
  std::vector<std::uint32_t> inv(p, 0);
  if (p < 2) return inv;
  inv[1] = 1;
  for (std::uint32_t x = 2; x < p; ++x)
    inv[x] = static_cast<std::uint32_t>(p - static_cast<std::uint64_t>(p / x) * inv[p % x] % p);
  return inv;
}

/// Jacobi symbol (a/n) by the binary reciprocity algorithm; n is never factored.
inline int jacobi_symbol(const BigInt& a_in, const BigInt& n_in) {
  if (n_in < 1 || (n_in & 1) == 0) fail(ErrorCode::EvenModulus, "Jacobi symbol needs an odd positive modulus");
  BigInt n = n_in;
  BigInt a = mod_floor(a_in, n);
  int result = 1;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      const unsigned r = static_cast<unsigned>(n & 7);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if ((a & 3) == 3 && (n & 3) == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

inline int jacobi_symbol(std::int64_t a, std::int64_t n) { return jacobi_symbol(BigInt(a), BigInt(n)); }

/// d!! = d (d-2) ... 1 for odd d.
inline BigInt double_factorial(std::int64_t d) {
  if (d < 1 || d % 2 == 0) fail(ErrorCode::EvenInput, "double factorial defined here for odd d >= 1 only");
  BigInt r = 1;
  for (std::int64_t k = d; k > 1; k -= 2) r *= k;
  return r;
}

inline std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = lo < 2 ? 2 : lo; n <= hi; ++n)
    if (is_prime(n)) out.push_back(n);
  return out;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace klm
