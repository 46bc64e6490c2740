#pragma once

// Power sums S_n(p) = sum_{a in F_p^x} Kl_2(p; a)^n and the symmetric-power
// moments m^d_2(p) = sum_a sum_{i=0}^d alpha_a^i beta_a^(d-i), where
// alpha_a + beta_a = -Kl_2(p; a) and alpha_a beta_a = p.
//
// Two conventions for power sums coexist. "Restricted" sums over a != 0 as
// above. "Completed" adds the a = 0 term Kl_2(p; 0) = -1, i.e.
// S'_n = S_n + (-1)^n; only under that convention does
//   S'_n == (-1)^(n-1) (n-1) p   (mod p^2)
// hold, and the closed d = 8 polynomial is written in completed sums.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "klm/ball.hpp"
#include "klm/bigint.hpp"
#include "klm/cyclotomic.hpp"
#include "klm/error.hpp"
#include "klm/ffprime.hpp"
#include "klm/kloosterman.hpp"
#include "klm/parallel.hpp"

namespace klm {

enum class Convention { Restricted, Completed };
enum class SumMethod { ExactCyclotomic, FloatCongruence };
enum class MomentMethod { Girard, DirectRecurrence, Appendix8 };

constexpr std::string_view to_string(Convention c) { return c == Convention::Restricted ? "restricted" : "completed"; }
constexpr std::string_view to_string(SumMethod m) {
  return m == SumMethod::ExactCyclotomic ? "exact-cyclotomic" : "float-congruence";
}
constexpr std::string_view to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::Girard: return "girard";
    case MomentMethod::DirectRecurrence: return "direct-recurrence";
    case MomentMethod::Appendix8: return "appendix8";
  }
  return "?";
}

inline Convention parse_convention(std::string_view s) {
  if (s == "restricted") return Convention::Restricted;
  if (s == "completed") return Convention::Completed;
  fail(ErrorCode::InvalidInput, "unknown convention '" + std::string(s) + "'");
}

inline SumMethod parse_sum_method(std::string_view s) {
  if (s == "exact-cyclotomic" || s == "exact") return SumMethod::ExactCyclotomic;
  if (s == "float-congruence" || s == "float") return SumMethod::FloatCongruence;
  fail(ErrorCode::InvalidInput, "unknown method '" + std::string(s) + "'");
}

/// The sign (-1)^n as an integer.
inline int neg_one_pow(unsigned n) { return n % 2 == 0 ? 1 : -1; }

struct PowerSumTable {
  Prime p;
  Convention convention;
  SumMethod method;
  std::map<unsigned, BigInt> values;
  /// Working precision of the float path that produced the table; 0 when exact.
  long precision_bits = 0;

  bool has(unsigned n) const { return values.count(n) != 0; }

  const BigInt& at(unsigned n) const {
    auto it = values.find(n);
    if (it == values.end()) fail(ErrorCode::MissingPowerSum, "S_" + std::to_string(n) + " not in table");
    return it->second;
  }

  unsigned nmax() const { return values.empty() ? 0 : values.rbegin()->first; }

  /// Same sums under the other convention: S'_n = S_n + (-1)^n.
  PowerSumTable converted(Convention target) const {
    if (target == convention) return *this;
    PowerSumTable out = *this;
    out.convention = target;
    const int dir = target == Convention::Completed ? 1 : -1;
    for (auto& [n, v] : out.values) v += dir * neg_one_pow(n);
    return out;
  }
};

/// The residue class mod p^2 that every completed sum S'_n must fall in.
inline BigInt completed_congruence_target(std::uint64_t p, unsigned n) {
  return BigInt(neg_one_pow(n - 1)) * (n - 1) * p;
}

struct ExactOptions {
  std::uint64_t exact_limit = 257;
  MulAlgorithm algorithm = MulAlgorithm::Auto;
  unsigned jobs = 1;
};

struct PrecisionPolicy {
  long start_bits = 64;
  long cap_bits = 4096;
};

struct MomentValue {
  Prime p;
  unsigned d;
  BigInt value;
  MomentMethod method;
};

namespace detail {

inline void check_exact_limit(Prime p, const ExactOptions& opt) {
  if (p.value() > opt.exact_limit)
    fail(ErrorCode::ExactLimitExceeded,
         "p = " + std::to_string(p.value()) + " above exact-path limit " + std::to_string(opt.exact_limit));
}

inline void add_into(std::vector<BigInt>& acc, const std::vector<BigInt>& x) {
  for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += x[t];
}

// Sum over a of per-a sequences produced by `per_a(counts, accumulators)`, in parallel blocks.
template <typename PerA>
std::vector<std::vector<BigInt>> sum_over_parameters(Prime p, std::size_t slots, unsigned jobs, PerA per_a) {
  const std::size_t q = p.value();
  const std::size_t workers = worker_count(q - 1, jobs);
  std::vector<std::vector<std::vector<BigInt>>> partial(
      workers, std::vector<std::vector<BigInt>>(slots, std::vector<BigInt>(q, BigInt(0))));
  parallel_blocks(q - 1, jobs, [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) per_a(FieldElem(p, static_cast<std::int64_t>(i + 1)), partial[w]);
  });
  for (std::size_t w = 1; w < workers; ++w)
    for (std::size_t s = 0; s < slots; ++s) add_into(partial[0][s], partial[w][s]);
  return std::move(partial[0]);
}

inline BigInt rational_value(Prime p, std::vector<BigInt> coeffs) { return CycInt(p, std::move(coeffs)).as_integer(); }

}  // namespace detail

/// Exact S_n for 1 <= n <= nmax by cumulative products Kl_2(p;a)^n in Z[zeta_p].
inline PowerSumTable power_sums_exact(Prime p, unsigned nmax, Convention convention, const ExactOptions& opt = {}) {
  detail::check_exact_limit(p, opt);
  if (nmax < 1) fail(ErrorCode::InvalidInput, "nmax must be >= 1");
  auto acc = detail::sum_over_parameters(p, nmax, opt.jobs, [&](const FieldElem& a, auto& slots) {
    const auto kl = kl2_counts(p, a).counts;
    std::vector<BigInt> power = kl;
    for (unsigned n = 1; n <= nmax; ++n) {
      detail::add_into(slots[n - 1], power);
      if (n < nmax) power = cyclic_product(power, kl, opt.algorithm);
    }
  });
  PowerSumTable table{p, Convention::Restricted, SumMethod::ExactCyclotomic, {}, 0};
  for (unsigned n = 1; n <= nmax; ++n) table.values[n] = detail::rational_value(p, std::move(acc[n - 1]));
  return table.converted(convention);
}

/// Completed sums from rigorous float enclosures, snapped to the unique
/// integer in the enclosure that satisfies the mod p^2 congruence.
inline PowerSumTable power_sums_float(Prime p, unsigned nmax, long precision_bits) {
  if (nmax < 1) fail(ErrorCode::InvalidInput, "nmax must be >= 1");
  const auto prec = static_cast<mpfr_prec_t>(precision_bits);
  const RootTable roots(p, prec);
  std::vector<Ball> sums(nmax, Ball(prec));
  for (std::uint64_t a = 1; a < p.value(); ++a) {
    const Ball kl = kl_real_enclosure(kl2_counts(p, FieldElem(p, static_cast<std::int64_t>(a))), roots, prec);
    Ball power = kl;
    for (unsigned n = 1; n <= nmax; ++n) {
      sums[n - 1] += power;
      if (n < nmax) power = power * kl;
    }
  }
  const BigInt p2 = BigInt(p.value()) * p.value();
  PowerSumTable table{p, Convention::Completed, SumMethod::FloatCongruence, {}, precision_bits};
  for (unsigned n = 1; n <= nmax; ++n) {
    Ball completed = sums[n - 1] + Ball::exact_int(neg_one_pow(n), prec);
    auto [lo, hi] = completed.integer_range();
    if (hi - lo + 1 >= p2)
      fail(ErrorCode::AmbiguousRounding, "S'_" + std::to_string(n) + " enclosure wider than p^2 at " +
                                             std::to_string(precision_bits) + " bits");
    const BigInt target = completed_congruence_target(p.value(), n);
    const BigInt candidate = lo + mod_floor(target - lo, p2);
    if (candidate > hi)
      fail(ErrorCode::AmbiguousRounding, "no integer congruent to the target inside the S'_" + std::to_string(n) +
                                             " enclosure at " + std::to_string(precision_bits) + " bits");
    table.values[n] = candidate;
  }
  return table;
}

/// Float path with the doubling policy: retry at twice the precision until
/// rounding is unambiguous or the cap is reached.
inline PowerSumTable power_sums_float_auto(Prime p, unsigned nmax, const PrecisionPolicy& policy = {}) {
  if (policy.start_bits > policy.cap_bits || policy.start_bits < 53)
    fail(ErrorCode::InvalidInput, "precision policy needs 53 <= start <= cap");
  for (long bits = policy.start_bits;; bits *= 2) {
    if (bits > policy.cap_bits) bits = policy.cap_bits;
    try {
      return power_sums_float(p, nmax, bits);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AmbiguousRounding || bits >= policy.cap_bits) throw;
    }
  }
}

/// m^d from restricted power sums via h_d(alpha, beta) with alpha beta = p:
///   m^d = (-1)^d sum_k (-1)^k C(d-k, k) p^k S_(d-2k),  S_0 = p - 1.
inline MomentValue sym_moment_girard(Prime p, unsigned d, const PowerSumTable& table) {
  if (table.convention != Convention::Restricted)
    fail(ErrorCode::WrongConvention, "Girard conversion expects restricted power sums");
  const BigInt pp = p.value();
  BigInt total = 0;
  BigInt p_power = 1;
  for (unsigned k = 0; 2 * k <= d; ++k) {
    const unsigned n = d - 2 * k;
    const BigInt s = n == 0 ? BigInt(pp - 1) : table.at(n);
    total += BigInt(neg_one_pow(k)) * binomial(d - k, k) * p_power * s;
    p_power *= pp;
  }
  return {p, d, neg_one_pow(d) * total, MomentMethod::Girard};
}

/// m^0..m^dmax by h_j = s h_(j-1) - p h_(j-2), s = -Kl_2(p;a), per a in Z[zeta_p].
inline std::vector<MomentValue> sym_moments_direct(Prime p, unsigned dmax, const ExactOptions& opt = {}) {
  detail::check_exact_limit(p, opt);
  const std::size_t q = p.value();
  auto acc = detail::sum_over_parameters(p, dmax + 1, opt.jobs, [&](const FieldElem& a, auto& slots) {
    std::vector<BigInt> s = kl2_counts(p, a).counts;
    for (auto& c : s) c = -c;
    std::vector<BigInt> prev(q, BigInt(0)), cur(q, BigInt(0));
    cur[0] = 1;  // h_0
    slots[0][0] += 1;
    for (unsigned j = 1; j <= dmax; ++j) {
      std::vector<BigInt> next = cyclic_product(s, cur, opt.algorithm);
      if (j >= 2)
        for (std::size_t t = 0; t < q; ++t) next[t] -= prev[t] * q;
      detail::add_into(slots[j], next);
      prev = std::move(cur);
      cur = std::move(next);
    }
  });
  std::vector<MomentValue> out;
  for (unsigned d = 0; d <= dmax; ++d)
    out.push_back({p, d, detail::rational_value(p, std::move(acc[d])), MomentMethod::DirectRecurrence});
  return out;
}

inline MomentValue sym_moment_direct(Prime p, unsigned d, const ExactOptions& opt = {}) {
  return sym_moments_direct(p, d, opt).back();
}

/// The closed d = 8 polynomial in completed sums.
inline MomentValue sym_moment_appendix8(Prime p, const PowerSumTable& table) {
  if (table.convention != Convention::Completed)
    fail(ErrorCode::WrongConvention, "the d = 8 polynomial is written in completed sums");
  const BigInt q = p.value();
  const BigInt q2 = q * q, q3 = q2 * q, q4 = q3 * q, q5 = q4 * q;
  const BigInt m = table.at(8) - 7 * q * table.at(6) + 15 * q2 * table.at(4) - 10 * q3 * table.at(2) + q5 - q4 +
                   10 * q3 - 15 * q2 + 7 * q - 1;
  return {p, 8, m, MomentMethod::Appendix8};
}

/// sum_a ((-1)^(n-1) Kl_n(p; a))^d exactly.
inline BigInt tensor_moment(Prime p, unsigned n, unsigned d, double budget = kDefaultKlnBudget,
                            MulAlgorithm algo = MulAlgorithm::Auto) {
  if (d == 0) return BigInt(p.value() - 1);
  const auto all = kln_counts_all(p, n, budget);
  const std::size_t q = p.value();
  std::vector<BigInt> acc(q, BigInt(0));
  for (const auto& ec : all) {
    std::vector<BigInt> base = ec.counts;
    if (n % 2 == 0)
      for (auto& c : base) c = -c;
    std::vector<BigInt> power = base;
    for (unsigned k = 1; k < d; ++k) power = cyclic_product(power, base, algo);
    detail::add_into(acc, power);
  }
  return detail::rational_value(p, std::move(acc));
}

}  // namespace klm
