#pragma once

// n-variable Kloosterman sums Kl_n(p; a) = sum psi(x_1 + ... + x_n) over
// (x_i) in (F_p^x)^n with x_1 ... x_n = a, psi(x) = zeta_p^x. Everything is
// reduced to the exponent distribution counts[t] = #{tuples with sum t}, from
// which both the exact cyclotomic value and float enclosures follow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <limits>
#include <string>
#include <vector>

#include "klm/ball.hpp"
#include "klm/bigint.hpp"
#include "klm/cyclotomic.hpp"
#include "klm/error.hpp"
#include "klm/ffprime.hpp"

namespace klm {

struct ExponentCounts {
  Prime p;
  FieldElem a;
  unsigned n;
  std::vector<BigInt> counts;

  BigInt total() const {
    BigInt s = 0;
    for (const auto& c : counts) s += c;
    return s;
  }

  CycInt value() const { return CycInt(p, counts); }
};

/// Default refusal threshold for the O(n p^3) joint-distribution DP.
inline constexpr double kDefaultKlnBudget = 1e10;

namespace detail {

inline void require_nonzero(const FieldElem& a) {
  if (a.is_zero()) fail(ErrorCode::ZeroParameter, "Kloosterman parameter a must be nonzero");
}

inline std::uint32_t small_prime(Prime p) {
  if (p.value() >= (std::uint64_t{1} << 32)) fail(ErrorCode::BudgetExceeded, "prime too large for enumeration");
  return static_cast<std::uint32_t>(p.value());
}

// Joint distribution of (product, sum) over (F_p^x)^k, stored as layer[b * p + t].
template <typename T>
std::vector<T> product_sum_layer(std::uint32_t p, unsigned k) {
  const std::size_t P = p;
  std::vector<T> cur(P * P, T(0)), next(P * P, T(0));
  for (std::size_t b = 1; b < P; ++b) cur[b * P + b] = T(1);
  for (unsigned layer = 2; layer <= k; ++layer) {
    std::fill(next.begin(), next.end(), T(0));
    for (std::size_t b = 1; b < P; ++b) {
      for (std::size_t t = 0; t < P; ++t) {
        const T& c = cur[b * P + t];
        if (c == 0) continue;
        for (std::size_t x = 1; x < P; ++x) {
          const std::size_t nb = b * x % P;
          std::size_t nt = t + x;
          if (nt >= P) nt -= P;
          next[nb * P + nt] += c;
        }
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

// The last variable is forced: x_n = a / (partial product of the first n-1).
template <typename T>
std::vector<BigInt> close_layer(const std::vector<T>& layer, const std::vector<std::uint32_t>& inv, std::uint32_t p,
                                std::uint32_t a) {
  const std::size_t P = p;
  std::vector<BigInt> counts(P, BigInt(0));
  for (std::size_t x = 1; x < P; ++x) {
    const std::size_t b = static_cast<std::size_t>(a) * inv[x] % P;
    for (std::size_t t = 0; t < P; ++t) {
      const T& c = layer[b * P + t];
      if (c == 0) continue;
      std::size_t nt = t + x;
      if (nt >= P) nt -= P;
      counts[nt] += BigInt(c);
    }
  }
  return counts;
}

template <typename T>
std::vector<std::vector<BigInt>> kln_dp(std::uint32_t p, unsigned n, std::span<const std::uint32_t> params) {
  const auto layer = product_sum_layer<T>(p, n - 1);
  const auto inv = inverse_table(p);
  std::vector<std::vector<BigInt>> out;
  out.reserve(params.size());
  for (std::uint32_t a : params) out.push_back(close_layer(layer, inv, p, a));
  return out;
}

inline void check_budget(Prime p, unsigned n, double budget) {
  if (n < 2) fail(ErrorCode::InvalidInput, "Kloosterman sums need n >= 2 variables");
  const double q = static_cast<double>(p.value());
  const double work = static_cast<double>(n) * q * q * q;
  if (work > budget)
    fail(ErrorCode::BudgetExceeded, "n p^3 = " + std::to_string(work) + " exceeds budget " + std::to_string(budget));
}

inline std::vector<std::vector<BigInt>> kln_counts_for(Prime p, unsigned n, std::span<const std::uint32_t> params) {
  const std::uint32_t q = small_prime(p);
  // (p-1)^(n-1) bounds every entry; use machine words while it fits.
  const double bits = (n - 1) * std::log2(static_cast<double>(q));
  return bits < 63 ? kln_dp<std::uint64_t>(q, n, params) : kln_dp<BigInt>(q, n, params);
}

}  // namespace detail

inline ExponentCounts kl2_counts(Prime p, const FieldElem& a) {
  detail::require_nonzero(a);
  const std::uint32_t q = detail::small_prime(p);
  const auto inv = inverse_table(q);
  std::vector<std::uint64_t> raw(q, 0);
  for (std::uint64_t x = 1; x < q; ++x) ++raw[(x + a.value() * inv[x]) % q];
  std::vector<BigInt> counts(raw.begin(), raw.end());
  return {p, a, 2, std::move(counts)};
}

inline CycInt kl2_value(Prime p, const FieldElem& a) { return kl2_counts(p, a).value(); }

inline ExponentCounts kln_counts(Prime p, const FieldElem& a, unsigned n, double budget = kDefaultKlnBudget) {
  detail::require_nonzero(a);
  detail::check_budget(p, n, budget);
  if (n == 2) return kl2_counts(p, a);
  const std::uint32_t param = static_cast<std::uint32_t>(a.value());
  auto counts = detail::kln_counts_for(p, n, std::span<const std::uint32_t>(&param, 1));
  return {p, a, n, std::move(counts.front())};
}

/// Exponent distributions for every a in F_p^x (index a - 1), sharing one DP.
inline std::vector<ExponentCounts> kln_counts_all(Prime p, unsigned n, double budget = kDefaultKlnBudget) {
  detail::check_budget(p, n, budget);
  const std::uint32_t q = detail::small_prime(p);
  std::vector<ExponentCounts> out;
  out.reserve(q - 1);
  if (n == 2) {
    for (std::uint32_t a = 1; a < q; ++a) out.push_back(kl2_counts(p, FieldElem(p, a)));
    return out;
  }
  std::vector<std::uint32_t> params(q - 1);
  for (std::uint32_t a = 1; a < q; ++a) params[a - 1] = a;
  auto counts = detail::kln_counts_for(p, n, params);
  for (std::uint32_t a = 1; a < q; ++a) out.push_back({p, FieldElem(p, a), n, std::move(counts[a - 1])});
  return out;
}

inline CycInt kln_value(Prime p, const FieldElem& a, unsigned n, double budget = kDefaultKlnBudget) {
  return kln_counts(p, a, n, budget).value();
}

/// cos(2 pi t / p) and sin(2 pi t / p) enclosures for t = 0..p-1.
class RootTable {
 public:
  RootTable(Prime p, mpfr_prec_t precision) : p_(p) {
    const Ball step = Ball::pi(precision + 16).scaled(2).divided(p.value());
    cos_.reserve(p.value());
    sin_.reserve(p.value());
    for (std::uint64_t t = 0; t < p.value(); ++t) {
      const Ball angle = step.scaled(static_cast<std::int64_t>(t));
      cos_.push_back(angle.cos());
      sin_.push_back(angle.sin());
    }
  }

  const Ball& cos(std::uint64_t t) const { return cos_[t]; }
  const Ball& sin(std::uint64_t t) const { return sin_[t]; }
  Prime prime() const noexcept { return p_; }

 private:
  Prime p_;
  std::vector<Ball> cos_;
  std::vector<Ball> sin_;
};

/// Real enclosure of Kl_2 from its exponent counts; checks the imaginary part vanishes.
inline Ball kl_real_enclosure(const ExponentCounts& ec, const RootTable& roots, mpfr_prec_t precision) {
  Ball re(precision), im(precision);
  for (std::uint64_t t = 0; t < ec.counts.size(); ++t) {
    if (ec.counts[t] == 0) continue;
    const auto k = static_cast<std::int64_t>(ec.counts[t]);
    re += roots.cos(t).scaled(k);
    im += roots.sin(t).scaled(k);
  }
  if (!im.contains_zero()) fail(ErrorCode::NotRational, "imaginary part of a real Kloosterman sum excludes zero");
  return re;
}

inline Ball kl2_float(Prime p, const FieldElem& a, mpfr_prec_t precision) {
  const RootTable roots(p, precision);
  return kl_real_enclosure(kl2_counts(p, a), roots, precision);
}

}  // namespace klm
