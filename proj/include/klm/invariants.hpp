#pragma once

// Closed-form invariants of the Sym^d moment of Kl_2: dimensions of the
// compactly supported and middle-extension cohomology, Swan conductors at
// infinity, local invariants at infinity with their Frobenius eigenvalues,
// Molien generating functions for the binary tetrahedral group, and the
// Fu-Wan determinant sign. Brackets [x] are floor throughout.

#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "klm/bigint.hpp"
#include "klm/error.hpp"
#include "klm/ffprime.hpp"

namespace klm {

using Rational = boost::multiprecision::cpp_rational;

/// A specific prime, or the "good p" sentinel (p large relative to d).
class PrimeOrGood {
 public:
  static PrimeOrGood good() { return PrimeOrGood(); }
  static PrimeOrGood specific(Prime p) { return PrimeOrGood(p); }
  static PrimeOrGood specific(std::uint64_t p) { return PrimeOrGood(Prime(p)); }

  bool is_good() const noexcept { return !p_.has_value(); }
  Prime prime() const {
    if (!p_) fail(ErrorCode::InvalidInput, "good sentinel carries no prime");
    return *p_;
  }

  /// Whether this prime behaves like the good row for degree d:
  /// p > d or p = 2 for odd d, p > d/2 for even d.
  bool good_for(unsigned d) const {
    if (!p_) return true;
    const std::uint64_t p = p_->value();
    return d % 2 == 1 ? (p > d || p == 2) : 2 * p > d;
  }

  std::string label() const { return p_ ? "p=" + std::to_string(p_->value()) : "good p"; }

 private:
  PrimeOrGood() = default;
  explicit PrimeOrGood(Prime p) : p_(p) {}
  std::optional<Prime> p_;
};

namespace detail {

inline void check_degree(unsigned d, const PrimeOrGood& pq) {
  if (d < 1) fail(ErrorCode::UnsupportedDegree, "degree must be >= 1");
  if (!pq.is_good() && pq.prime().value() == 2 && d < 2)
    fail(ErrorCode::UnsupportedDegree, "p = 2 formulas need d > 1");
}

// [d/(2p)] and [d/(2p) + 1/2]
inline std::int64_t floor_d_over_2p(unsigned d, std::uint64_t p) { return static_cast<std::int64_t>(d / (2 * p)); }
inline std::int64_t floor_d_over_2p_half(unsigned d, std::uint64_t p) {
  return static_cast<std::int64_t>((d + p) / (2 * p));
}

}  // namespace detail

/// dim M^d_! = dim M^d_* (equal to the Swan conductor of Sym^d at infinity).
inline std::int64_t dim_m_shriek(unsigned d, const PrimeOrGood& pq) {
  detail::check_degree(d, pq);
  const std::int64_t D = d;
  if (pq.is_good()) return d % 2 == 0 ? D / 2 : (D + 1) / 2;
  const std::uint64_t p = pq.prime().value();
  if (p == 2) return d % 2 == 1 ? (D + 1) / 2 : (D + 2) / 4;
  return d % 2 == 0 ? D / 2 - detail::floor_d_over_2p(d, p) : (D + 1) / 2 - detail::floor_d_over_2p_half(d, p);
}

/// dim M^d_{!*}, the pure middle-extension part.
inline std::int64_t dim_m_middle(unsigned d, const PrimeOrGood& pq) {
  detail::check_degree(d, pq);
  const std::int64_t D = d;
  if (pq.is_good()) return d % 2 == 0 ? 2 * ((D + 2) / 4) - 2 : (D - 1) / 2;
  const std::uint64_t p = pq.prime().value();
  if (p == 2) {
    if (d % 2 == 1) return (D - 1) / 2;
    return d % 12 == 0 ? D / 6 - 2 : 2 * ((D + 2) / 12);
  }
  if (d % 4 == 0) return D / 2 - 2 * detail::floor_d_over_2p(d, p) - 2;
  if (d % 4 == 2) return D / 2 - 2 * detail::floor_d_over_2p(d, p) - 1;
  return (D - 1) / 2 - detail::floor_d_over_2p_half(d, p);
}

/// Swan conductor of Sym^d at infinity.
inline std::int64_t swan_sym(unsigned d, Prime p) {
  if (d < 1) fail(ErrorCode::UnsupportedDegree, "degree must be >= 1");
  const std::int64_t D = d;
  if (p.value() == 2) return d % 2 == 1 ? (D + 1) / 2 : (D + 2) / 4;
  return dim_m_shriek(d, PrimeOrGood::specific(p));
}

/// (Sym^d)^{I_infinity} as a Frobenius module: every eigenvalue is +-p^(d/2).
struct LocalInvariants {
  std::int64_t dimension = 0;
  std::int64_t plus_multiplicity = 0;   // eigenvalue +p^(d/2)
  std::int64_t minus_multiplicity = 0;  // eigenvalue -p^(d/2)
  BigInt eigenvalue_magnitude = 0;      // p^(d/2); 0 when the module vanishes

  BigInt frobenius_trace() const { return (plus_multiplicity - minus_multiplicity) * eigenvalue_magnitude; }

  std::string describe() const {
    if (dimension == 0) return "0";
    std::ostringstream os;
    os << "dim " << dimension << ": +" << eigenvalue_magnitude << " x" << plus_multiplicity;
    if (minus_multiplicity > 0) os << ", -" << eigenvalue_magnitude << " x" << minus_multiplicity;
    return os.str();
  }
};

inline LocalInvariants local_inv_inf(unsigned d, Prime p) {
  if (d < 1) fail(ErrorCode::UnsupportedDegree, "degree must be >= 1");
  LocalInvariants out;
  if (d % 2 == 1) return out;
  const std::uint64_t q = p.value();
  if (q == 2) {
    const std::int64_t k = d / 24;
    const unsigned r8 = d % 8, r24 = d % 24;
    if (r8 == 0) {
      out.plus_multiplicity = k + 1;
      out.minus_multiplicity = k;
    } else if (r8 == 6) {
      out.plus_multiplicity = k;
      out.minus_multiplicity = k + 1;
    } else if (r24 == 2 || r24 == 4 || r24 == 10) {
      out.plus_multiplicity = k;
      out.minus_multiplicity = k;
    } else {  // 12, 18, 20 mod 24
      out.plus_multiplicity = k + 1;
      out.minus_multiplicity = k + 1;
    }
  } else {
    out.plus_multiplicity = detail::floor_d_over_2p(d, q) + (d % 4 == 0 ? 1 : 0);
  }
  out.dimension = out.plus_multiplicity + out.minus_multiplicity;
  if (out.dimension > 0) out.eigenvalue_magnitude = ipow(BigInt(q), d / 2);
  return out;
}

/// N(t) / D(t) with integer polynomials and exact rational expansion.
class RationalSeries {
 public:
  RationalSeries(std::vector<BigInt> numerator, std::vector<BigInt> denominator)
      : num_(std::move(numerator)), den_(std::move(denominator)) {
    if (den_.empty() || den_[0] == 0) fail(ErrorCode::InvalidInput, "denominator needs a nonzero constant term");
  }

  const std::vector<BigInt>& numerator() const noexcept { return num_; }
  const std::vector<BigInt>& denominator() const noexcept { return den_; }

  friend RationalSeries operator+(const RationalSeries& a, const RationalSeries& b) {
    auto n = add(mul(a.num_, b.den_), mul(b.num_, a.den_));
    return RationalSeries(std::move(n), mul(a.den_, b.den_));
  }

  /// Multiplies the series by 1/k.
  RationalSeries divided(const BigInt& k) const {
    auto d = den_;
    for (auto& c : d) c *= k;
    return RationalSeries(num_, std::move(d));
  }

  /// Coefficient of t^n, from the recurrence D_0 c_n = N_n - sum_{k>=1} D_k c_{n-k}.
  const Rational& coefficient(std::size_t n) const {
    while (cache_.size() <= n) {
      const std::size_t m = cache_.size();
      Rational c = m < num_.size() ? Rational(num_[m]) : Rational(0);
      for (std::size_t k = 1; k < den_.size() && k <= m; ++k) c -= Rational(den_[k]) * cache_[m - k];
      cache_.push_back(c / Rational(den_[0]));
    }
    return cache_[n];
  }

  /// Coefficients 0..nmax, required to be integers.
  std::vector<BigInt> integer_expansion(std::size_t nmax) const {
    std::vector<BigInt> out;
    out.reserve(nmax + 1);
    for (std::size_t n = 0; n <= nmax; ++n) {
      const Rational& c = coefficient(n);
      if (boost::multiprecision::denominator(c) != 1)
        fail(ErrorCode::NotRational, "series coefficient " + std::to_string(n) + " is not an integer");
      out.push_back(boost::multiprecision::numerator(c));
    }
    return out;
  }

 private:
  static std::vector<BigInt> mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
    std::vector<BigInt> out(a.size() + b.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  static std::vector<BigInt> add(std::vector<BigInt> a, const std::vector<BigInt>& b) {
    if (a.size() < b.size()) a.resize(b.size(), BigInt(0));
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
  }

  std::vector<BigInt> num_;
  std::vector<BigInt> den_;
  mutable std::vector<Rational> cache_;
};

/// mult / det(1 - g t) for an SU(2) element g of integer trace.
inline RationalSeries molien_term(std::int64_t trace, std::int64_t multiplicity) {
  return RationalSeries({BigInt(multiplicity)}, {BigInt(1), BigInt(-trace), BigInt(1)});
}

/// mult/(1 - s t + t^2) + mult/(1 + s t + t^2) for traces +-s with s^2 = s_squared.
inline RationalSeries molien_conjugate_pair(std::int64_t s_squared, std::int64_t multiplicity) {
  return RationalSeries({BigInt(2 * multiplicity), BigInt(0), BigInt(2 * multiplicity)},
                        {BigInt(1), BigInt(0), BigInt(2 - s_squared), BigInt(0), BigInt(1)});
}

/// Trace multiplicities of the binary tetrahedral group in its 2-dim representation.
struct TraceClass {
  std::int64_t trace;
  std::int64_t multiplicity;
};
inline constexpr TraceClass kBinaryTetrahedralTraces[] = {{2, 1}, {-2, 1}, {1, 8}, {-1, 8}, {0, 6}};

/// sum_d dim (Sym^d)^{2T} t^d = (1/24) sum_g 1/(1 - Tr(g) t + t^2).
inline RationalSeries molien_dim_rational() {
  std::optional<RationalSeries> sum;
  for (const auto& c : kBinaryTetrahedralTraces) {
    auto term = molien_term(c.trace, c.multiplicity);
    sum = sum ? *sum + term : term;
  }
  return sum->divided(24);
}

/// sum_d Tr(phi_1, (Sym^d)^{2T}) t^d over the non-trivial coset of 2T in 2O:
/// 6 elements of trace sqrt2, 6 of trace -sqrt2, 12 of trace 0.
inline RationalSeries molien_frob_rational() {
  return (molien_conjugate_pair(2, 6) + molien_term(0, 12)).divided(24);
}

inline std::vector<BigInt> molien_dim_series(std::size_t dmax) { return molien_dim_rational().integer_expansion(dmax); }
inline std::vector<BigInt> molien_frob_series(std::size_t dmax) {
  return molien_frob_rational().integer_expansion(dmax);
}

/// Closed form for dim (Sym^d)^{I_infinity} at p = 2.
inline std::int64_t molien_dim_closed_form(unsigned d) {
  if (d % 2 == 1) return 0;
  const unsigned r = d % 12;
  return (r == 0 || r == 6 || r == 8) ? d / 12 + 1 : d / 12;
}

inline std::int64_t molien_frob_pattern(unsigned d) {
  if (d % 8 == 0) return 1;
  if (d % 8 == 6) return -1;
  return 0;
}

/// Normalized determinant of Frobenius on M^d_{!*} over F_p (Fu-Wan), p odd.
inline int fuwan_det(unsigned d, Prime p) {
  const std::uint64_t q = p.value();
  if (q == 2) fail(ErrorCode::EvenPrime, "determinant formula needs p > 2");
  if (d < 1) fail(ErrorCode::UnsupportedDegree, "degree must be >= 1");
  if (d % 2 == 0) return 1;
  const auto qi = static_cast<std::int64_t>(q);
  int sign = 1;
  if (detail::floor_d_over_2p_half(d, q) % 2 == 1) sign *= jacobi_symbol(-2, qi);
  for (std::int64_t j = 0; j <= (static_cast<std::int64_t>(d) - 1) / 2; ++j) {
    const std::int64_t odd = 2 * j + 1;
    if (odd % qi == 0) continue;
    sign *= jacobi_symbol(j % 2 == 0 ? odd : -odd, qi);
  }
  return sign;
}

struct DetCheckRow {
  std::uint64_t p;
  int fuwan;
  int jacobi;
  bool pass;
};

struct DetCheckReport {
  unsigned d;
  BigInt modulus;
  std::vector<DetCheckRow> rows;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

/// Compares fuwan_det(d, p) with the Jacobi symbol (p / d!!) for primes d < p <= pmax.
inline DetCheckReport det_character_check(unsigned d, std::uint64_t pmax) {
  if (d < 3 || d % 2 == 0) fail(ErrorCode::UnsupportedDegree, "determinant character check needs odd d >= 3");
  DetCheckReport report{d, double_factorial(d), {}};
  for (std::uint64_t p : primes_in_range(d + 1, pmax)) {
    const int fw = fuwan_det(d, Prime(p));
    const int js = jacobi_symbol(BigInt(p), report.modulus);
    report.rows.push_back({p, fw, js, fw == js});
  }
  return report;
}

/// The dimension table of M^d_{!*} for d = 1..13.
struct DimsTable {
  std::vector<unsigned> degrees;
  std::vector<std::string> row_labels;
  std::vector<std::vector<std::string>> cells;  // [row][degree]

  std::string render_text() const {
    std::ostringstream os;
    auto emit = [&](const std::string& label, const std::vector<std::string>& row) {
      std::ostringstream line;
      line << std::left << std::setw(9) << label;
      for (const auto& c : row) line << std::right << std::setw(6) << c;
      std::string s = line.str();
      s.erase(s.find_last_not_of(' ') + 1);
      os << s << '\n';
    };
    std::vector<std::string> head;
    for (unsigned d : degrees) head.push_back(std::to_string(d));
    emit("d", head);
    for (std::size_t r = 0; r < row_labels.size(); ++r) emit(row_labels[r], cells[r]);
    return os.str();
  }

  std::string render_csv() const {
    std::ostringstream os;
    os << "row";
    for (unsigned d : degrees) os << ',' << d;
    os << '\n';
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
      os << row_labels[r];
      for (const auto& c : cells[r]) os << ',' << c;
      os << '\n';
    }
    return os.str();
  }
};

inline constexpr std::uint64_t kTablePrimes[] = {2, 3, 5, 7, 11, 13};

/// Cells left blank wherever M^d vanishes for every p (good dimension 0);
/// "good" wherever the prime already satisfies the goodness bound.
inline DimsTable dims_table(unsigned dmax = 13) {
  DimsTable t;
  for (unsigned d = 1; d <= dmax; ++d) t.degrees.push_back(d);
  const auto good = PrimeOrGood::good();

  t.row_labels.push_back("good p");
  t.row_labels.push_back("duality");
  std::vector<std::string> good_row, duality_row;
  for (unsigned d : t.degrees) {
    const auto g = dim_m_middle(d, good);
    good_row.push_back(std::to_string(g));
    duality_row.push_back(g == 0 ? "" : (d % 2 == 1 ? "+" : "-"));
  }
  t.cells.push_back(good_row);
  t.cells.push_back(duality_row);

  for (std::uint64_t p : kTablePrimes) {
    const auto pq = PrimeOrGood::specific(p);
    t.row_labels.push_back(pq.label());
    std::vector<std::string> row;
    for (unsigned d : t.degrees) {
      if (dim_m_middle(d, good) == 0) row.emplace_back("");
      else if (pq.good_for(d)) row.emplace_back("good");
      else row.push_back(std::to_string(dim_m_middle(d, pq)));
    }
    t.cells.push_back(row);
  }
  return t;
}

}  // namespace klm
