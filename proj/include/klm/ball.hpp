#pragma once

// Midpoint-radius real arithmetic on top of MPFR. Midpoints are rounded to
// nearest at the working precision; radii are kept at 64 bits and rounded
// upward, so every Ball is a rigorous enclosure of the value it tracks.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>

#include <gmp.h>
#include <mpfr.h>

#include "klm/bigint.hpp"

namespace klm {

inline constexpr mpfr_prec_t kRadiusBits = 64;

/// Owning MPFR value.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t precision) { mpfr_init2(v_, precision); mpfr_set_zero(v_, 1); }
  Mpfr(const Mpfr& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  Mpfr(Mpfr&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }
  Mpfr& operator=(Mpfr other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~Mpfr() { mpfr_clear(v_); }

  mpfr_ptr get() noexcept { return v_; }
  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_prec_t precision() const noexcept { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

namespace detail {

inline BigInt to_bigint(mpfr_srcptr x, mpfr_rnd_t rnd) {
  mpz_t z;
  mpz_init(z);
  mpfr_get_z(z, x, rnd);
  char* s = mpz_get_str(nullptr, 10, z);
  BigInt out(s);
  void (*free_fn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &free_fn);
  free_fn(s, std::char_traits<char>::length(s) + 1);
  mpz_clear(z);
  return out;
}

inline void set_bigint(mpfr_ptr dst, const BigInt& x, mpfr_rnd_t rnd) {
  mpfr_set_str(dst, x.str().c_str(), 10, rnd);
}

inline mpfr_prec_t bits_for(const BigInt& x) {
  return static_cast<mpfr_prec_t>(x == 0 ? 2 : boost::multiprecision::msb(abs(x)) + 2);
}

}  // namespace detail

class Ball {
 public:
  explicit Ball(mpfr_prec_t precision) : mid_(precision), rad_(kRadiusBits) {}

  static Ball exact_int(const BigInt& value, mpfr_prec_t precision) {
    Ball b(precision);
    const int inexact = mpfr_set_str(b.mid_.get(), value.str().c_str(), 10, MPFR_RNDN);
    if (inexact != 0 || detail::bits_for(value) > precision) b.add_rounding_error();
    return b;
  }

  static Ball pi(mpfr_prec_t precision) {
    Ball b(precision);
    mpfr_const_pi(b.mid_.get(), MPFR_RNDN);
    b.add_rounding_error();
    return b;
  }

  mpfr_prec_t precision() const noexcept { return mid_.precision(); }
  const Mpfr& mid() const noexcept { return mid_; }
  const Mpfr& rad() const noexcept { return rad_; }

  Ball& operator+=(const Ball& o) {
    mpfr_add(mid_.get(), mid_.get(), o.mid_.get(), MPFR_RNDN);
    mpfr_add(rad_.get(), rad_.get(), o.rad_.get(), MPFR_RNDU);
    add_rounding_error();
    return *this;
  }

  friend Ball operator+(Ball a, const Ball& b) { return a += b; }

  friend Ball operator*(const Ball& a, const Ball& b) {
    Ball out(std::max(a.precision(), b.precision()));
    mpfr_mul(out.mid_.get(), a.mid_.get(), b.mid_.get(), MPFR_RNDN);
    Mpfr t(kRadiusBits);
    // |a.m| b.r + |b.m| a.r + a.r b.r
    mpfr_abs(t.get(), a.mid_.get(), MPFR_RNDU);
    mpfr_mul(out.rad_.get(), t.get(), b.rad_.get(), MPFR_RNDU);
    mpfr_abs(t.get(), b.mid_.get(), MPFR_RNDU);
    mpfr_mul(t.get(), t.get(), a.rad_.get(), MPFR_RNDU);
    mpfr_add(out.rad_.get(), out.rad_.get(), t.get(), MPFR_RNDU);
    mpfr_mul(t.get(), a.rad_.get(), b.rad_.get(), MPFR_RNDU);
    mpfr_add(out.rad_.get(), out.rad_.get(), t.get(), MPFR_RNDU);
    out.add_rounding_error();
    return out;
  }

  Ball scaled(std::int64_t k) const {
    Ball out(precision());
    mpfr_mul_si(out.mid_.get(), mid_.get(), k, MPFR_RNDN);
    mpfr_mul_ui(out.rad_.get(), rad_.get(), static_cast<unsigned long>(k < 0 ? -k : k), MPFR_RNDU);
    out.add_rounding_error();
    return out;
  }

  Ball divided(std::uint64_t k) const {
    Ball out(precision());
    mpfr_div_ui(out.mid_.get(), mid_.get(), k, MPFR_RNDN);
    mpfr_div_ui(out.rad_.get(), rad_.get(), k, MPFR_RNDU);
    out.add_rounding_error();
    return out;
  }

  // cos and sin are 1-Lipschitz, so the input radius carries over unchanged.
  Ball cos() const {
    Ball out(precision());
    mpfr_cos(out.mid_.get(), mid_.get(), MPFR_RNDN);
    mpfr_set(out.rad_.get(), rad_.get(), MPFR_RNDU);
    out.add_rounding_error();
    return out;
  }

  Ball sin() const {
    Ball out(precision());
    mpfr_sin(out.mid_.get(), mid_.get(), MPFR_RNDN);
    mpfr_set(out.rad_.get(), rad_.get(), MPFR_RNDU);
    out.add_rounding_error();
    return out;
  }

  /// Lower and upper endpoints, rounded outward at a precision that keeps them exact enough to compare.
  std::pair<Mpfr, Mpfr> endpoints() const {
    const mpfr_prec_t prec = precision() + kRadiusBits;
    Mpfr lo(prec), hi(prec);
    mpfr_sub(lo.get(), mid_.get(), rad_.get(), MPFR_RNDD);
    mpfr_add(hi.get(), mid_.get(), rad_.get(), MPFR_RNDU);
    return {std::move(lo), std::move(hi)};
  }

  bool contains(const BigInt& k) const {
    Mpfr exact(std::max<mpfr_prec_t>(detail::bits_for(k), 2));
    detail::set_bigint(exact.get(), k, MPFR_RNDN);
    auto [lo, hi] = endpoints();
    return mpfr_lessequal_p(lo.get(), exact.get()) && mpfr_lessequal_p(exact.get(), hi.get());
  }

  bool contains_zero() const { return contains(BigInt(0)); }

  /// Integers inside the enclosure: [ceil(lo), floor(hi)].
  std::pair<BigInt, BigInt> integer_range() const {
    auto [lo, hi] = endpoints();
    return {detail::to_bigint(lo.get(), MPFR_RNDU), detail::to_bigint(hi.get(), MPFR_RNDD)};
  }

  double mid_double() const { return mid_.to_double(); }
  double rad_double() const { return mpfr_get_d(rad_.get(), MPFR_RNDU); }

 private:
  // Round-to-nearest error is at most half an ulp, bounded by |mid| 2^(1-prec).
  void add_rounding_error() {
    if (mpfr_zero_p(mid_.get())) return;
    Mpfr e(kRadiusBits);
    mpfr_abs(e.get(), mid_.get(), MPFR_RNDU);
    mpfr_mul_2si(e.get(), e.get(), 1 - static_cast<long>(precision()), MPFR_RNDU);
    mpfr_add(rad_.get(), rad_.get(), e.get(), MPFR_RNDU);
  }

  Mpfr mid_;
  Mpfr rad_;
};

struct ComplexBall {
  Ball re;
  Ball im;
};

}  // namespace klm
