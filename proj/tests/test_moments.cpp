#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "klm/moments.hpp"

using namespace klm;

namespace {

// m^d by Frobenius eigenvalues in double precision: alpha + beta = -Kl, alpha beta = p.
long long eigenvalue_moment(std::uint64_t p, unsigned d) {
  std::complex<double> total = 0;
  for (std::uint64_t a = 1; a < p; ++a) {
    double kl = 0;
    for (std::uint64_t x = 1; x < p; ++x) {
      std::uint64_t inv = 1;
      while (inv * x % p != 1) ++inv;
      kl += std::cos(2 * M_PI * static_cast<double>((x + a * inv) % p) / static_cast<double>(p));
    }
    const std::complex<double> disc = std::sqrt(std::complex<double>(kl * kl - 4.0 * static_cast<double>(p)));
    const std::complex<double> alpha = (-kl + disc) / 2.0, beta = (-kl - disc) / 2.0;
    for (unsigned i = 0; i <= d; ++i) total += std::pow(alpha, i) * std::pow(beta, d - i);
  }
  return std::llround(total.real());
}

const PowerSumTable& restricted(std::uint64_t p, unsigned nmax = 13) {
  static std::map<std::uint64_t, PowerSumTable> memo;
  auto it = memo.find(p);
  if (it == memo.end() || it->second.nmax() < nmax)
    it = memo.insert_or_assign(p, power_sums_exact(Prime(p), nmax, Convention::Restricted)).first;
  return it->second;
}

}  // namespace

TEST(PowerSumsExact, FrozenSmallValues) {
  const auto& t3 = restricted(3, 5);
  const std::vector<long long> s3 = {1, 5, 7, 17, 31};
  for (unsigned n = 1; n <= 5; ++n) EXPECT_EQ(t3.at(n), s3[n - 1]);
  const auto& t5 = restricted(5, 5);
  const std::vector<long long> s5 = {1, 19, -14, 159, -229};
  for (unsigned n = 1; n <= 5; ++n) EXPECT_EQ(t5.at(n), s5[n - 1]);
}

TEST(PowerSumsExact, SecondMomentClosedForm) {
  for (std::uint64_t q : primes_in_range(2, 50)) {
    const auto t = power_sums_exact(Prime(q), 2, Convention::Restricted);
    ASSERT_EQ(t.at(1), 1);
    ASSERT_EQ(t.at(2), BigInt(q * q - q - 1));
  }
}

TEST(PowerSumsExact, CompletedConvention) {
  const auto c = power_sums_exact(Prime(3), 2, Convention::Completed);
  EXPECT_EQ(c.at(1), 0);
  EXPECT_EQ(c.at(2), 6);
  EXPECT_EQ(mod_floor(c.at(2) - completed_congruence_target(3, 2), BigInt(9)), 0);
  const auto& r = restricted(7);
  const auto back = r.converted(Convention::Completed).converted(Convention::Restricted);
  EXPECT_EQ(back.values, r.values);
}

TEST(PowerSumsExact, CompletedCongruenceHolds) {
  for (std::uint64_t q : primes_in_range(2, 60)) {
    const auto c = restricted(q).converted(Convention::Completed);
    const BigInt p2 = BigInt(q) * q;
    for (unsigned n = 1; n <= 13; ++n)
      ASSERT_EQ(mod_floor(c.at(n) - completed_congruence_target(q, n), p2), 0) << q << " " << n;
  }
}

TEST(PowerSumsExact, RestrictedCongruenceFailsAtNTwo) {
  const auto& r = restricted(5);
  EXPECT_NE(mod_floor(r.at(2) - completed_congruence_target(5, 2), BigInt(25)), 0);
}

TEST(PowerSumsExact, IndependentOfCharacterChoice) {
  for (std::uint64_t q : {5ULL, 7ULL, 11ULL}) {
    const Prime p(q);
    for (std::uint64_t k = 2; k < q; ++k) {
      for (unsigned n = 1; n <= 4; ++n) {
        CycInt total = CycInt::zero(p);
        for (std::uint64_t a = 1; a < q; ++a) {
          const auto kl = kl2_value(p, FieldElem(p, static_cast<std::int64_t>(a))).galois_conjugate(k);
          CycInt pw = CycInt::one(p);
          for (unsigned i = 0; i < n; ++i) pw = pw * kl;
          total += pw;
        }
        ASSERT_EQ(total.as_integer(), restricted(q).at(n));
      }
    }
  }
}

TEST(PowerSumsExact, ParallelMatchesSequentialAndNtt) {
  const Prime p(41);
  const auto seq = power_sums_exact(p, 9, Convention::Restricted, {257, MulAlgorithm::Schoolbook, 1});
  const auto par = power_sums_exact(p, 9, Convention::Restricted, {257, MulAlgorithm::Schoolbook, 4});
  const auto ntt = power_sums_exact(p, 9, Convention::Restricted, {257, MulAlgorithm::Ntt, 2});
  EXPECT_EQ(seq.values, par.values);
  EXPECT_EQ(seq.values, ntt.values);
}

TEST(PowerSumsExact, LimitAndInputErrors) {
  try {
    power_sums_exact(Prime(263), 2, Convention::Restricted);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExactLimitExceeded);
  }
  EXPECT_NO_THROW(power_sums_exact(Prime(263), 1, Convention::Restricted, {263}));
  EXPECT_THROW(power_sums_exact(Prime(5), 0, Convention::Restricted), Error);
}

TEST(PowerSumsFloat, AgreesWithExact) {
  for (std::uint64_t q : {2ULL, 3ULL, 13ULL, 97ULL, 199ULL}) {
    const auto f = power_sums_float_auto(Prime(q), 10);
    const auto e = restricted(q).converted(Convention::Completed);
    for (unsigned n = 1; n <= 10; ++n) ASSERT_EQ(f.at(n), e.at(n)) << q << " " << n;
    EXPECT_EQ(f.method, SumMethod::FloatCongruence);
    EXPECT_EQ(f.convention, Convention::Completed);
  }
  EXPECT_EQ(power_sums_float(Prime(3), 2, 64).at(2), 6);
}

TEST(PowerSumsFloat, InsufficientPrecisionIsAmbiguous) {
  try {
    power_sums_float(Prime(1009), 40, 53);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AmbiguousRounding);
  }
  // the doubling policy recovers
  const auto t = power_sums_float_auto(Prime(1009), 40);
  EXPECT_GT(t.precision_bits, 53);
  EXPECT_THROW(power_sums_float_auto(Prime(5), 4, {128, 64}), Error);
}

TEST(Girard, SmallDegrees) {
  for (std::uint64_t q : primes_in_range(2, 200)) {
    const Prime p(q);
    const auto t = power_sums_exact(p, 4, Convention::Restricted);
    ASSERT_EQ(sym_moment_girard(p, 0, t).value, BigInt(q - 1));
    ASSERT_EQ(sym_moment_girard(p, 1, t).value, -1);
    ASSERT_EQ(sym_moment_girard(p, 2, t).value, -1);
    if (q > 2) ASSERT_EQ(sym_moment_girard(p, 4, t).value, -1 - BigInt(q) * q) << q;
  }
}

TEST(Girard, MatchesEigenvalueOracle) {
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    const Prime p(q);
    for (unsigned d = 0; d <= 8; ++d)
      ASSERT_EQ(sym_moment_girard(p, d, restricted(q)).value, eigenvalue_moment(q, d)) << q << " " << d;
  }
}

TEST(Girard, Errors) {
  const Prime p(7);
  PowerSumTable partial = restricted(7);
  partial.values.erase(4);
  try {
    sym_moment_girard(p, 6, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPowerSum);
  }
  EXPECT_NO_THROW(sym_moment_girard(p, 5, partial));
  try {
    sym_moment_girard(p, 2, restricted(7).converted(Convention::Completed));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongConvention);
  }
}

TEST(Direct, Examples) {
  EXPECT_EQ(sym_moment_direct(Prime(3), 2).value, -1);
  EXPECT_EQ(sym_moment_direct(Prime(17), 0).value, 16);
  try {
    sym_moment_direct(Prime(263), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExactLimitExceeded);
  }
}

TEST(Direct, AgreesWithGirardAndAppendix8) {
  for (std::uint64_t q : primes_in_range(2, 60)) {
    const Prime p(q);
    const auto direct = sym_moments_direct(p, 10);
    for (unsigned d = 0; d <= 10; ++d) ASSERT_EQ(direct[d].value, sym_moment_girard(p, d, restricted(q)).value) << q << " " << d;
    ASSERT_EQ(sym_moment_appendix8(p, restricted(q).converted(Convention::Completed)).value, direct[8].value);
  }
}

TEST(Appendix8, FeedsPinnedCoefficients) {
  for (auto [q, a] : {std::pair{5ULL, -66LL}, std::pair{7ULL, 176LL}}) {
    const auto m = sym_moment_appendix8(Prime(q), restricted(q).converted(Convention::Completed)).value;
    const BigInt p2 = BigInt(q) * q;
    EXPECT_EQ((-m - 1 - p2 * p2) / p2, a);
  }
  try {
    sym_moment_appendix8(Prime(5), restricted(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongConvention);
  }
}

TEST(TensorMoment, Examples) {
  for (std::uint64_t q : {3ULL, 7ULL, 19ULL}) {
    EXPECT_EQ(tensor_moment(Prime(q), 2, 1), -1);
    EXPECT_EQ(tensor_moment(Prime(q), 3, 0), BigInt(q - 1));
  }
  // sum over a of Kl_3(3;a) from a triple loop, sign (+1) for odd n
  std::complex<double> brute = 0;
  for (int x = 1; x < 3; ++x)
    for (int y = 1; y < 3; ++y)
      for (int z = 1; z < 3; ++z) brute += std::polar(1.0, 2 * M_PI * (x + y + z) / 3.0);
  EXPECT_EQ(tensor_moment(Prime(3), 3, 1), std::llround(brute.real()));
}

TEST(TensorMoment, NTwoMatchesSignedPowerSums) {
  for (std::uint64_t q : {5ULL, 11ULL}) {
    for (unsigned d = 1; d <= 6; ++d) {
      const BigInt expected = (d % 2 ? -1 : 1) * restricted(q).at(d);
      ASSERT_EQ(tensor_moment(Prime(q), 2, d), expected);
    }
  }
}
