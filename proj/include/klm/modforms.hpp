#pragma once

// Truncated integer q-expansions: Dedekind eta products, eta quotients,
// Hecke-relation and Deligne-bound validation, and coefficient tables
// imported from JSON.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "klm/bigint.hpp"
#include "klm/error.hpp"
#include "klm/ffprime.hpp"

namespace klm {

/// sum_i coeffs[i] q^(leading + i), known for exponents < truncation.
class QSeries {
 public:
  QSeries(std::int64_t leading, std::vector<BigInt> coeffs)
      : leading_(leading), truncation_(leading + static_cast<std::int64_t>(coeffs.size())), coeffs_(std::move(coeffs)) {}

  std::int64_t leading_exponent() const noexcept { return leading_; }
  std::int64_t truncation() const noexcept { return truncation_; }
  const std::vector<BigInt>& coeffs() const noexcept { return coeffs_; }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const BigInt& c) { return c == 0; });
  }

  /// Coefficient of q^n; zero below the leading exponent.
  BigInt operator[](std::int64_t n) const {
    if (n >= truncation_)
      fail(ErrorCode::TruncationTooShort, "q^" + std::to_string(n) + " beyond truncation " + std::to_string(truncation_));
    if (n < leading_) return 0;
    return coeffs_[static_cast<std::size_t>(n - leading_)];
  }

  friend QSeries operator*(const QSeries& a, const QSeries& b) {
    const std::int64_t lead = a.leading_ + b.leading_;
    const std::int64_t trunc = std::min(a.truncation_ + b.leading_, b.truncation_ + a.leading_);
    const std::size_t len = static_cast<std::size_t>(std::max<std::int64_t>(trunc - lead, 0));
    std::vector<BigInt> out(len, BigInt(0));
    for (std::size_t i = 0; i < a.coeffs_.size() && i < len; ++i) {
      if (a.coeffs_[i] == 0) continue;
      for (std::size_t j = 0; i + j < len && j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return QSeries(lead, std::move(out));
  }

  friend QSeries operator+(const QSeries& a, const QSeries& b) {
    const std::int64_t lead = std::min(a.leading_, b.leading_);
    const std::int64_t trunc = std::min(a.truncation_, b.truncation_);
    std::vector<BigInt> out(static_cast<std::size_t>(std::max<std::int64_t>(trunc - lead, 0)), BigInt(0));
    for (std::int64_t n = lead; n < trunc; ++n) out[static_cast<std::size_t>(n - lead)] = a[n] + b[n];
    return QSeries(lead, std::move(out));
  }

  friend bool operator==(const QSeries& a, const QSeries& b) {
    return a.leading_ == b.leading_ && a.truncation_ == b.truncation_ && a.coeffs_ == b.coeffs_;
  }

  /// Multiplicative inverse of a series with leading coefficient +-1.
  QSeries inverse() const {
    if (coeffs_.empty() || abs(coeffs_[0]) != 1)
      fail(ErrorCode::InvalidInput, "only series with leading coefficient +-1 are invertible over Z");
    const std::size_t len = coeffs_.size();
    const BigInt& c0 = coeffs_[0];
    std::vector<BigInt> inv(len, BigInt(0));
    inv[0] = c0;  // 1 / (+-1)
    for (std::size_t n = 1; n < len; ++n) {
      BigInt s = 0;
      for (std::size_t k = 1; k <= n; ++k)
        if (coeffs_[k] != 0) s += coeffs_[k] * inv[n - k];
      inv[n] = -s * c0;
    }
    return QSeries(-leading_, std::move(inv));
  }

  QSeries pow(std::int64_t e) const {
    if (e < 0) return inverse().pow(-e);
    QSeries result(0, std::vector<BigInt>(coeffs_.size(), BigInt(0)));
    result.coeffs_[0] = 1;
    QSeries base = *this;
    while (e > 0) {
      if (e & 1) result = result * base;
      e >>= 1;
      if (e > 0) base = base * base;
    }
    return result;
  }

 private:
  std::int64_t leading_;
  std::int64_t truncation_;
  std::vector<BigInt> coeffs_;
};

/// prod_{n>=1} (1 - q^n) to `terms` coefficients, by the pentagonal number theorem.
inline QSeries eta_unit_series(std::size_t terms) {
  if (terms < 1) fail(ErrorCode::InvalidInput, "need at least one term");
  std::vector<BigInt> c(terms, BigInt(0));
  const auto T = static_cast<std::int64_t>(terms);
  for (std::int64_t k = 0;; ++k) {
    bool any = false;
    for (std::int64_t kk : {k, -k}) {
      if (k == 0 && kk != 0) continue;
      const std::int64_t g = kk * (3 * kk - 1) / 2;
      if (g < T) {
        c[static_cast<std::size_t>(g)] = (k % 2 == 0) ? 1 : -1;
        any = true;
      }
      if (k == 0) break;
    }
    if (!any && k > 0) break;
  }
  return QSeries(0, std::move(c));
}

struct EtaFactor {
  std::int64_t divisor;
  std::int64_t exponent;
};

/// prod_j eta(d_j tau)^(e_j).
struct EtaQuotient {
  std::vector<EtaFactor> factors;

  std::int64_t exponent_sum() const {
    std::int64_t s = 0;
    for (const auto& f : factors) s += f.exponent;
    return s;
  }
  std::int64_t order_numerator() const {
    std::int64_t s = 0;
    for (const auto& f : factors) s += f.divisor * f.exponent;
    return s;
  }
  bool integral_weight() const { return exponent_sum() % 2 == 0; }
  std::int64_t weight() const { return exponent_sum() / 2; }
  bool integral_order() const { return order_numerator() % 24 == 0; }
  std::int64_t q_order() const { return order_numerator() / 24; }

  std::string describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < factors.size(); ++i)
      os << (i ? "," : "") << factors[i].divisor << '^' << factors[i].exponent;
    return os.str();
  }

  /// Parses "1^2,2^2,3^2,6^2" (divisor^exponent, comma separated).
  static EtaQuotient parse(const std::string& spec) {
    EtaQuotient eq;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto caret = item.find('^');
      try {
        if (caret == std::string::npos) throw std::invalid_argument("missing ^");
        eq.factors.push_back({std::stoll(item.substr(0, caret)), std::stoll(item.substr(caret + 1))});
      } catch (const std::exception&) {
        fail(ErrorCode::InvalidInput, "bad eta factor '" + item + "', expected divisor^exponent");
      }
      if (eq.factors.back().divisor < 1) fail(ErrorCode::InvalidInput, "eta divisor must be positive");
    }
    if (eq.factors.empty()) fail(ErrorCode::InvalidInput, "empty eta quotient");
    return eq;
  }
};

/// q-expansion of an eta quotient with `terms` coefficients past the leading exponent.
inline QSeries eta_quotient_series(const EtaQuotient& eq, std::size_t terms) {
  if (!eq.integral_order())
    fail(ErrorCode::FractionalOrder, "sum d_j e_j = " + std::to_string(eq.order_numerator()) + " is not divisible by 24");
  const auto unit = eta_unit_series(terms);
  std::vector<BigInt> one(terms, BigInt(0));
  one[0] = 1;
  QSeries product(0, std::move(one));
  for (const auto& f : eq.factors) {
    std::vector<BigInt> scaled(terms, BigInt(0));
    for (std::size_t i = 0; i * static_cast<std::size_t>(f.divisor) < terms; ++i)
      scaled[i * static_cast<std::size_t>(f.divisor)] = unit.coeffs()[i];
    product = product * QSeries(0, std::move(scaled)).pow(f.exponent);
  }
  return QSeries(eq.q_order(), product.coeffs());
}

struct HeckeReport {
  bool normalized = true;
  std::size_t relations_checked = 0;
  std::size_t deligne_checked = 0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Checks a(mn) = a(m)a(n) for coprime m, n; the prime-power recurrence for
/// p not dividing the level; and |a(p)| <= 2 p^((k-1)/2), all up to `bound`.
inline HeckeReport hecke_validate(const QSeries& s, unsigned weight, std::uint64_t level, std::uint64_t bound) {
  if (static_cast<std::int64_t>(bound) >= s.truncation())
    fail(ErrorCode::TruncationTooShort, "bound " + std::to_string(bound) + " needs truncation > bound");
  if (s.leading_exponent() < 1 || s[1] != 1)
    fail(ErrorCode::NotNormalized, "series is not a normalized cusp form: a(1) != 1");
  HeckeReport report;
  auto a = [&](std::uint64_t n) { return s[static_cast<std::int64_t>(n)]; };
  auto gcd = [](std::uint64_t x, std::uint64_t y) {
    while (y) {
      x %= y;
      std::swap(x, y);
    }
    return x;
  };
  for (std::uint64_t m = 2; m * m <= bound; ++m) {
    for (std::uint64_t n = m + 1; m * n <= bound; ++n) {
      if (gcd(m, n) != 1) continue;
      ++report.relations_checked;
      if (a(m * n) != a(m) * a(n))
        report.failures.push_back("a(" + std::to_string(m * n) + ") != a(" + std::to_string(m) + ") a(" +
                                  std::to_string(n) + ")");
    }
  }
  for (std::uint64_t p : primes_in_range(2, bound)) {
    if (level % p == 0) continue;
    const BigInt pk = ipow(BigInt(p), weight - 1);
    for (std::uint64_t pr = p; pr * p <= bound; pr *= p) {
      ++report.relations_checked;
      const BigInt prev = pr == p ? BigInt(1) : a(pr / p);
      if (a(pr * p) != a(p) * a(pr) - pk * prev)
        report.failures.push_back("prime-power recurrence fails at " + std::to_string(pr * p));
    }
    ++report.deligne_checked;
    if (a(p) * a(p) > 4 * pk)
      report.failures.push_back("Deligne bound fails at p = " + std::to_string(p));
  }
  return report;
}

inline std::map<std::uint64_t, BigInt> prime_coefficients(const QSeries& s, std::uint64_t pmax) {
  if (static_cast<std::int64_t>(pmax) >= s.truncation())
    fail(ErrorCode::TruncationTooShort, "pmax " + std::to_string(pmax) + " beyond truncation");
  std::map<std::uint64_t, BigInt> out;
  for (std::uint64_t p : primes_in_range(2, pmax)) out[p] = s[static_cast<std::int64_t>(p)];
  return out;
}

/// a(p)^2 <= 4 p^(k-1).
inline bool deligne_bound_holds(const BigInt& ap, std::uint64_t p, unsigned weight) {
  return ap * ap <= 4 * ipow(BigInt(p), weight - 1);
}

/// Externally supplied Fourier coefficients of a form of given weight and level.
struct CoefficientTable {
  static constexpr int kSchemaVersion = 1;

  std::string label;
  unsigned weight = 0;
  std::uint64_t level = 1;
  std::uint64_t nebentypus_modulus = 1;
  std::map<std::uint64_t, BigInt> entries;

  std::optional<BigInt> at(std::uint64_t n) const {
    auto it = entries.find(n);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }

  /// Prime indices (not dividing the level) violating |a(p)| <= 2 p^((k-1)/2).
  std::vector<std::uint64_t> deligne_violations() const {
    std::vector<std::uint64_t> bad;
    for (const auto& [n, a] : entries)
      if (is_prime(n) && level % n != 0 && !deligne_bound_holds(a, n, weight)) bad.push_back(n);
    return bad;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["label"] = label;
    j["weight"] = weight;
    j["level"] = level;
    j["nebentypus_modulus"] = nebentypus_modulus;
    j["entries"] = nlohmann::json::array();
    for (const auto& [n, a] : entries) j["entries"].push_back({{"n", n}, {"a", to_decimal(a)}});
    return j;
  }

  static CoefficientTable from_json(const nlohmann::json& j) {
    try {
      if (j.at("schema_version").get<int>() != kSchemaVersion)
        fail(ErrorCode::InvalidInput, "unsupported coefficient table schema_version");
      CoefficientTable t;
      t.label = j.at("label").get<std::string>();
      t.weight = j.at("weight").get<unsigned>();
      t.level = j.at("level").get<std::uint64_t>();
      t.nebentypus_modulus = j.at("nebentypus_modulus").get<std::uint64_t>();
      for (const auto& e : j.at("entries")) t.entries[e.at("n").get<std::uint64_t>()] = from_decimal(e.at("a").get<std::string>());
      return t;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvalidInput, std::string("malformed coefficient table: ") + e.what());
    }
  }

  /// Loads a table and refuses it if any prime coefficient breaks the Deligne bound.
  static CoefficientTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidInput, "cannot open coefficient table " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvalidInput, "coefficient table is not JSON: " + std::string(e.what()));
    }
    auto t = from_json(j);
    const auto bad = t.deligne_violations();
    if (!bad.empty())
      fail(ErrorCode::RangeFailure, "coefficient table '" + t.label + "' violates the Deligne bound at p = " +
                                        std::to_string(bad.front()));
    return t;
  }
};

/// A candidate newform attached to a moment degree, with an eta realization when one is known.
struct RegistryForm {
  unsigned degree;
  std::string label;
  unsigned weight;
  std::uint64_t level;
  std::optional<EtaQuotient> eta;
};

inline std::optional<RegistryForm> registry_form(unsigned degree) {
  switch (degree) {
    case 5: return RegistryForm{5, "weight 3 level 15 nebentypus (./15)", 3, 15, std::nullopt};
    case 6: return RegistryForm{6, "eta(t)^2 eta(2t)^2 eta(3t)^2 eta(6t)^2", 4, 6, EtaQuotient{{{1, 2}, {2, 2}, {3, 2}, {6, 2}}}};
    case 7: return RegistryForm{7, "weight 3 level 525", 3, 525, std::nullopt};
    case 8: return RegistryForm{8, "weight 6 level 6", 6, 6, std::nullopt};
    default: return std::nullopt;
  }
}

/// Default truncation for forms compared against primes up to pmax.
inline std::size_t default_truncation(std::uint64_t pmax) { return static_cast<std::size_t>(2 * pmax + 16); }

}  // namespace klm
