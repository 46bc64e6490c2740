#pragma once

// Exact integer convolution by multi-modular number-theoretic transforms and
// Garner reconstruction. The modulus set grows with the coefficient bound, so
// the result is exact for arbitrary-size inputs.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "klm/bigint.hpp"
#include "klm/ffprime.hpp"

namespace klm::ntt {

struct NttPrime {
  std::uint64_t modulus;
  std::uint64_t root;  // generator of the full multiplicative group
};

inline constexpr unsigned kTwoAdicity = 32;

namespace detail {

inline std::uint64_t primitive_root(std::uint64_t q) {
  // q - 1 = c * 2^32 with c small enough to trial-divide.
  std::vector<std::uint64_t> factors{2};
  std::uint64_t c = (q - 1) >> kTwoAdicity;
  for (std::uint64_t f = 2; f * f <= c; ++f) {
    if (c % f == 0) {
      factors.push_back(f);
      while (c % f == 0) c /= f;
    }
  }
  if (c > 1) factors.push_back(c);
  for (std::uint64_t g = 2;; ++g) {
    bool ok = true;
    for (std::uint64_t f : factors) {
      if (pow_mod(g, (q - 1) / f, q) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
}

}  // namespace detail

/// The first `count` primes of the form c*2^32 + 1 below 2^62, descending.
inline std::vector<NttPrime> primes(std::size_t count) {
  static std::mutex mu;
  static std::vector<NttPrime> cache;
  static std::uint64_t next_c = (std::uint64_t{1} << 30) - 1;
  std::lock_guard lock(mu);
  while (cache.size() < count) {
    const std::uint64_t q = (next_c << kTwoAdicity) + 1;
    --next_c;
    if (is_prime(q)) cache.push_back({q, detail::primitive_root(q)});
  }
  return {cache.begin(), cache.begin() + static_cast<std::ptrdiff_t>(count)};
}

inline void transform(std::vector<std::uint64_t>& a, const NttPrime& prime, bool inverse) {
  const std::uint64_t q = prime.modulus;
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::uint64_t w = pow_mod(prime.root, (q - 1) / len, q);
    if (inverse) w = pow_mod(w, q - 2, q);
    for (std::size_t i = 0; i < n; i += len) {
      std::uint64_t wk = 1;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::uint64_t u = a[i + k];
        const std::uint64_t v = mul_mod(a[i + k + len / 2], wk, q);
        a[i + k] = u + v >= q ? u + v - q : u + v;
        a[i + k + len / 2] = u >= v ? u - v : u + q - v;
        wk = mul_mod(wk, w, q);
      }
    }
  }
  if (inverse) {
    const std::uint64_t n_inv = pow_mod(n % q, q - 2, q);
    for (auto& x : a) x = mul_mod(x, n_inv, q);
  }
}

inline std::uint64_t reduce(const BigInt& x, std::uint64_t q) {
  BigInt r = x % q;
  if (r < 0) r += q;
  return static_cast<std::uint64_t>(r);
}

/// Cyclic convolution modulo X^len - 1, exact over Z.
inline std::vector<BigInt> cyclic_convolution(std::span<const BigInt> x, std::span<const BigInt> y) {
  const std::size_t len = x.size();
  if (y.size() != len) fail(ErrorCode::ModulusMismatch, "convolution operands differ in length");
  if (len == 0) return {};

  BigInt max_x = 0, max_y = 0;
  for (const auto& v : x) max_x = std::max(max_x, abs(v));
  for (const auto& v : y) max_y = std::max(max_y, abs(v));
  if (max_x == 0 || max_y == 0) return std::vector<BigInt>(len, BigInt(0));
  // Each folded output is a sum of at most len products; need product of moduli > 2*bound.
  const BigInt bound = 2 * max_x * max_y * len + 1;

  std::size_t size = 1;
  while (size < 2 * len - 1) size <<= 1;
  if (size > (std::size_t{1} << kTwoAdicity)) fail(ErrorCode::BudgetExceeded, "convolution too long for NTT moduli");

  std::size_t count = 1;
  BigInt modulus_product = 0;
  std::vector<NttPrime> moduli;
  for (;; ++count) {
    moduli = primes(count);
    modulus_product = 1;
    for (const auto& m : moduli) modulus_product *= m.modulus;
    if (modulus_product > bound) break;
  }

  std::vector<std::vector<std::uint64_t>> residues(moduli.size());
  for (std::size_t k = 0; k < moduli.size(); ++k) {
    const std::uint64_t q = moduli[k].modulus;
    std::vector<std::uint64_t> fa(size, 0), fb(size, 0);
    for (std::size_t i = 0; i < len; ++i) {
      fa[i] = reduce(x[i], q);
      fb[i] = reduce(y[i], q);
    }
    transform(fa, moduli[k], false);
    transform(fb, moduli[k], false);
    for (std::size_t i = 0; i < size; ++i) fa[i] = mul_mod(fa[i], fb[i], q);
    transform(fa, moduli[k], true);
    std::vector<std::uint64_t> folded(len, 0);
    for (std::size_t i = 0; i < 2 * len - 1; ++i) {
      std::uint64_t& slot = folded[i % len];
      slot += fa[i];
      if (slot >= q) slot -= q;
    }
    residues[k] = std::move(folded);
  }

  // Garner: mixed-radix digits, then Horner back to a BigInt.
  const std::size_t r = moduli.size();
  std::vector<std::vector<std::uint64_t>> inv(r, std::vector<std::uint64_t>(r, 0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < i; ++j)
      inv[j][i] = pow_mod(moduli[j].modulus % moduli[i].modulus, moduli[i].modulus - 2, moduli[i].modulus);

  const BigInt half = modulus_product / 2;
  std::vector<BigInt> out(len);
  std::vector<std::uint64_t> digits(r);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < r; ++i) {
      const std::uint64_t qi = moduli[i].modulus;
      std::uint64_t v = residues[i][t];
      for (std::size_t j = 0; j < i; ++j) {
        const std::uint64_t dj = digits[j] % qi;
        v = v >= dj ? v - dj : v + qi - dj;
        v = mul_mod(v, inv[j][i], qi);
      }
      digits[i] = v;
    }
    BigInt value = digits[r - 1];
    for (std::size_t i = r - 1; i-- > 0;) value = value * moduli[i].modulus + digits[i];
    if (value > half) value -= modulus_product;
    out[t] = std::move(value);
  }
  return out;
}

}  // namespace klm::ntt
