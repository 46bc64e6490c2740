#pragma once

// Exact arithmetic in Z[zeta_p]. An element is stored as p integer
// coefficients c_t of zeta^t. Since 1 + zeta + ... + zeta^(p-1) = 0, adding a
// constant to every coefficient leaves the value unchanged; the canonical
// representative is the one with c_0 = 0.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "klm/ball.hpp"
#include "klm/bigint.hpp"
#include "klm/error.hpp"
#include "klm/ffprime.hpp"
#include "klm/ntt.hpp"

namespace klm {

enum class MulAlgorithm { Schoolbook, Ntt, Auto };

/// Auto switches to the transform path above this prime.
inline constexpr std::uint64_t kNttThreshold = 512;

namespace detail {

// Outer loop over the sparser operand; small multipliers avoid BigInt temporaries.
inline std::vector<BigInt> schoolbook(std::span<const BigInt> x, std::span<const BigInt> y) {
  const std::size_t p = x.size();
  std::size_t nz_x = 0, nz_y = 0;
  for (std::size_t i = 0; i < p; ++i) {
    nz_x += x[i] != 0;
    nz_y += y[i] != 0;
  }
  const auto sparse = nz_x <= nz_y ? x : y;
  const auto dense = nz_x <= nz_y ? y : x;
  std::vector<BigInt> out(p, BigInt(0));
  for (std::size_t j = 0; j < p; ++j) {
    const BigInt& c = sparse[j];
    if (c == 0) continue;
    const bool small = boost::multiprecision::msb(abs(c)) < 62;
    const long long cs = small ? static_cast<long long>(c) : 0;
    auto accumulate = [&](std::size_t i, std::size_t k) {
      if (dense[i] == 0) return;
      if (cs == 1) out[k] += dense[i];
      else if (small) out[k] += dense[i] * cs;
      else out[k] += dense[i] * c;
    };
    // k = i + j, wrapping once at p.
    for (std::size_t i = 0; i + j < p; ++i) accumulate(i, i + j);
    for (std::size_t i = p - j; i < p; ++i) accumulate(i, i + j - p);
  }
  return out;
}

}  // namespace detail

/// Product modulo X^p - 1 of two coefficient sequences (any representatives).
inline std::vector<BigInt> cyclic_product(std::span<const BigInt> x, std::span<const BigInt> y,
                                          MulAlgorithm algo = MulAlgorithm::Auto) {
  if (x.size() != y.size()) fail(ErrorCode::ModulusMismatch, "cyclic product of sequences of different length");
  if (algo == MulAlgorithm::Auto) algo = x.size() > kNttThreshold ? MulAlgorithm::Ntt : MulAlgorithm::Schoolbook;
  return algo == MulAlgorithm::Ntt ? ntt::cyclic_convolution(x, y) : detail::schoolbook(x, y);
}

class CycInt {
 public:
  explicit CycInt(Prime p) : p_(p), coeffs_(p.value(), BigInt(0)) {}

  /// Takes any representative and canonicalizes it.
  CycInt(Prime p, std::vector<BigInt> coeffs) : p_(p), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != p.value())
      fail(ErrorCode::InvalidInput, "coefficient vector length must equal p");
    canonicalize();
  }

  static CycInt zero(Prime p) { return CycInt(p); }

  static CycInt integer(Prime p, const BigInt& k) {
    std::vector<BigInt> c(p.value(), BigInt(0));
    c[0] = k;
    return CycInt(p, std::move(c));
  }

  static CycInt one(Prime p) { return integer(p, 1); }

  static CycInt zeta_power(Prime p, std::uint64_t t) {
    std::vector<BigInt> c(p.value(), BigInt(0));
    c[t % p.value()] = 1;
    return CycInt(p, std::move(c));
  }

  Prime prime() const noexcept { return p_; }
  std::span<const BigInt> coeffs() const noexcept { return coeffs_; }
  const BigInt& operator[](std::size_t t) const { return coeffs_[t]; }

  bool is_rational() const {
    for (std::size_t t = 2; t < coeffs_.size(); ++t)
      if (coeffs_[t] != coeffs_[1]) return false;
    return true;
  }

  /// The rational value -c of a canonical element (0, c, c, ..., c).
  BigInt as_integer() const {
    if (!is_rational()) fail(ErrorCode::NotRational, "element of Z[zeta_" + std::to_string(p_.value()) + "] is not rational");
    return coeffs_.size() > 1 ? BigInt(-coeffs_[1]) : BigInt(coeffs_[0]);
  }

  /// The automorphism zeta -> zeta^k for k prime to p.
  CycInt galois_conjugate(std::uint64_t k) const {
    const std::uint64_t p = p_.value();
    if (k % p == 0) fail(ErrorCode::InvalidInput, "Galois conjugation needs k prime to p");
    std::vector<BigInt> c(p, BigInt(0));
    for (std::uint64_t t = 0; t < p; ++t) c[mul_mod(t, k % p, p)] = coeffs_[t];
    return CycInt(p_, std::move(c));
  }

  friend bool operator==(const CycInt& a, const CycInt& b) {
    return a.p_ == b.p_ && a.coeffs_ == b.coeffs_;
  }

  CycInt& operator+=(const CycInt& o) {
    check_same_prime(o);
    for (std::size_t t = 0; t < coeffs_.size(); ++t) coeffs_[t] += o.coeffs_[t];
    canonicalize();
    return *this;
  }

  CycInt& operator-=(const CycInt& o) {
    check_same_prime(o);
    for (std::size_t t = 0; t < coeffs_.size(); ++t) coeffs_[t] -= o.coeffs_[t];
    canonicalize();
    return *this;
  }

  CycInt& operator*=(const BigInt& k) {
    for (auto& c : coeffs_) c *= k;
    return *this;
  }

  friend CycInt operator+(CycInt a, const CycInt& b) { return a += b; }
  friend CycInt operator-(CycInt a, const CycInt& b) { return a -= b; }
  friend CycInt operator*(CycInt a, const BigInt& k) { return a *= k; }

  friend CycInt multiply(const CycInt& a, const CycInt& b, MulAlgorithm algo = MulAlgorithm::Auto) {
    a.check_same_prime(b);
    return CycInt(a.p_, cyclic_product(a.coeffs_, b.coeffs_, algo));
  }

  friend CycInt operator*(const CycInt& a, const CycInt& b) { return multiply(a, b); }

  /// Rigorous enclosure of sum_t c_t exp(2 pi i t / p).
  ComplexBall approx_complex(mpfr_prec_t precision) const {
    if (precision < 53) fail(ErrorCode::InvalidInput, "precision below 53 bits");
    const std::uint64_t p = p_.value();
    ComplexBall out{Ball(precision), Ball(precision)};
    const Ball two_pi_over_p = Ball::pi(precision + 16).scaled(2).divided(p);
    for (std::uint64_t t = 0; t < p; ++t) {
      if (coeffs_[t] == 0) continue;
      const Ball angle = two_pi_over_p.scaled(static_cast<std::int64_t>(t));
      const Ball c = Ball::exact_int(coeffs_[t], precision);
      out.re += c * angle.cos();
      out.im += c * angle.sin();
    }
    return out;
  }

 private:
  void check_same_prime(const CycInt& o) const {
    if (!(p_ == o.p_))
      fail(ErrorCode::ModulusMismatch, "Z[zeta_" + std::to_string(p_.value()) + "] vs Z[zeta_" + std::to_string(o.p_.value()) + "]");
  }

  void canonicalize() {
    if (coeffs_.empty() || coeffs_[0] == 0) return;
    const BigInt shift = coeffs_[0];
    for (auto& c : coeffs_) c -= shift;
  }

  Prime p_;
  std::vector<BigInt> coeffs_;
};

}  // namespace klm
