#include <gtest/gtest.h>

#include <random>

#include "klm/ffprime.hpp"

using namespace klm;

namespace {

bool trial_division(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Legendre symbol by Euler's criterion, then multiplicativity over a factorization of n.
int jacobi_oracle(std::int64_t a, std::uint64_t n) {
  int result = 1;
  for (std::uint64_t q = 3; n > 1; q += 2) {
    while (n % q == 0) {
      n /= q;
      const auto r = static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(q)) + q) % q);
      if (r == 0) return 0;
      result *= pow_mod(r, (q - 1) / 2, q) == 1 ? 1 : -1;
    }
  }
  return result;
}

}  // namespace

TEST(IsPrime, AgreesWithTrialDivisionBelow20000) {
  for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(is_prime(n), trial_division(n)) << n;
}

TEST(IsPrime, LargeKnownValues) {
  EXPECT_TRUE(is_prime((std::uint64_t{1} << 61) - 1));
  EXPECT_TRUE(is_prime(18446744073709551557ULL));
  EXPECT_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
  EXPECT_FALSE(is_prime(3825123056546413051ULL));
  EXPECT_FALSE(is_prime(std::uint64_t{4294967297}));
}

TEST(Prime, RejectsComposites) {
  EXPECT_EQ(Prime(7).value(), 7u);
  for (std::uint64_t bad : {0ULL, 1ULL, 4ULL, 91ULL}) {
    try {
      Prime p(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotPrime);
    }
  }
}

TEST(FieldElem, ReducesRepresentatives) {
  const Prime p(7);
  EXPECT_EQ(FieldElem(p, -1).value(), 6u);
  EXPECT_EQ(FieldElem(p, 15).value(), 1u);
  EXPECT_TRUE(FieldElem(p, 14).is_zero());
  EXPECT_EQ((FieldElem(p, 3) * FieldElem(p, 5)).value(), 1u);
  EXPECT_THROW(FieldElem(p, 1) * FieldElem(Prime(5), 1), Error);
}

TEST(ModInverse, BruteForceSmallPrimes) {
  for (std::uint64_t q : primes_in_range(2, 200)) {
    const Prime p(q);
    for (std::uint64_t x = 1; x < q; ++x) {
      const auto inv = mod_inverse(FieldElem(p, static_cast<std::int64_t>(x)));
      ASSERT_EQ(x * inv.value() % q, 1u);
    }
  }
  EXPECT_EQ(mod_inverse(FieldElem(Prime(7), 3)).value(), 5u);
}

TEST(ModInverse, ZeroFails) {
  try {
    mod_inverse(FieldElem(Prime(11), 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroInverse);
  }
}

TEST(ModInverse, LargePrime) {
  const Prime p((std::uint64_t{1} << 61) - 1);
  const FieldElem x(p, 123456789012345LL);
  EXPECT_EQ((x * mod_inverse(x)).value(), 1u);
}

TEST(InverseTable, MatchesModInverse) {
  for (std::uint32_t q : {2u, 3u, 97u, 257u}) {
    const auto t = inverse_table(q);
    for (std::uint32_t x = 1; x < q; ++x) ASSERT_EQ(static_cast<std::uint64_t>(x) * t[x] % q, 1u);
  }
}

TEST(Jacobi, Examples) {
  EXPECT_EQ(jacobi_symbol(2, 7), 1);
  EXPECT_EQ(jacobi_symbol(3, 7), -1);
  EXPECT_EQ(jacobi_symbol(7, 15), -1);
  EXPECT_EQ(jacobi_symbol(5, 15), 0);
  EXPECT_EQ(jacobi_symbol(-1, 13), 1);
  EXPECT_EQ(jacobi_symbol(0, 1), 1);
}

TEST(Jacobi, AgreesWithEulerCriterionOracle) {
  for (std::uint64_t n = 1; n < 400; n += 2)
    for (std::int64_t a = -50; a < 450; ++a) ASSERT_EQ(jacobi_symbol(a, static_cast<std::int64_t>(n)), jacobi_oracle(a, n)) << a << " " << n;
}

TEST(Jacobi, ReciprocityOnRandomOddPairs) {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t m = static_cast<std::int64_t>(rng() % 100000) * 2 + 3;
    const std::int64_t n = static_cast<std::int64_t>(rng() % 100000) * 2 + 3;
    if (std::gcd(m, n) != 1) continue;
    const int sign = ((m % 4 == 3) && (n % 4 == 3)) ? -1 : 1;
    ASSERT_EQ(jacobi_symbol(m, n) * jacobi_symbol(n, m), sign);
  }
}

TEST(Jacobi, BigModulus) {
  const BigInt n = double_factorial(13);
  EXPECT_EQ(jacobi_symbol(BigInt(17), n), jacobi_oracle(17, 135135));
}

TEST(Jacobi, EvenModulusFails) {
  for (std::int64_t n : {0, 2, 10, -3}) {
    try {
      jacobi_symbol(3, n);
      FAIL() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EvenModulus);
    }
  }
}

TEST(DoubleFactorial, Values) {
  EXPECT_EQ(double_factorial(1), 1);
  EXPECT_EQ(double_factorial(7), 105);
  EXPECT_EQ(double_factorial(13), 135135);
  try {
    double_factorial(6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EvenInput);
  }
}

TEST(Binomial, PascalRule) {
  for (unsigned n = 1; n < 40; ++n)
    for (unsigned k = 1; k < n; ++k) ASSERT_EQ(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
  EXPECT_EQ(binomial(5, 7), 0);
}

TEST(PrimesInRange, Counts) {
  EXPECT_EQ(primes_in_range(2, 100).size(), 25u);
  EXPECT_EQ(primes_in_range(3, 100).size(), 24u);
  EXPECT_TRUE(primes_in_range(24, 28).empty());
}
