#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "klm/modforms.hpp"

using namespace klm;

namespace {

// prod_{n=1}^{N-1} (1 - q^n) by repeated multiplication, truncated at q^N.
std::vector<long long> product_oracle(std::size_t N) {
  std::vector<long long> c(N, 0);
  c[0] = 1;
  for (std::size_t n = 1; n < N; ++n)
    for (std::size_t i = N; i-- > n;) c[i] -= c[i - n];
  return c;
}

QSeries random_series(std::mt19937_64& rng, std::int64_t lead, std::size_t len) {
  std::uniform_int_distribution<int> dist(-9, 9);
  std::vector<BigInt> c(len);
  for (auto& x : c) x = dist(rng);
  return QSeries(lead, c);
}

QSeries from_ints(std::int64_t lead, std::vector<long long> c) { return QSeries(lead, std::vector<BigInt>(c.begin(), c.end())); }

}  // namespace

TEST(EtaUnit, PentagonalExamples) {
  const auto s = eta_unit_series(13);
  const std::vector<long long> head = {1, -1, -1, 0, 0, 1, 0, 1};
  for (std::size_t n = 0; n < head.size(); ++n) EXPECT_EQ(s[static_cast<std::int64_t>(n)], head[n]) << n;
  EXPECT_EQ(s[12], -1);
  EXPECT_THROW(eta_unit_series(0), Error);
}

TEST(EtaUnit, MatchesProductExpansion) {
  const std::size_t N = 2000;
  const auto s = eta_unit_series(N);
  const auto oracle = product_oracle(N);
  for (std::size_t n = 0; n < N; ++n) ASSERT_EQ(s[static_cast<std::int64_t>(n)], oracle[n]) << n;
}

TEST(EtaQuotient, DeltaCoefficients) {
  const EtaQuotient delta{{{1, 24}}};
  EXPECT_EQ(delta.weight(), 12);
  EXPECT_EQ(delta.q_order(), 1);
  const auto s = eta_quotient_series(delta, 10);
  EXPECT_EQ(s[1], 1);
  EXPECT_EQ(s[2], -24);
  EXPECT_EQ(s[3], 252);
  EXPECT_EQ(s[4], -1472);
  EXPECT_EQ(s[0], 0);
}

TEST(EtaQuotient, ParseAndDescribe) {
  const auto eq = EtaQuotient::parse("1^2,2^2,3^2,6^2");
  EXPECT_EQ(eq.describe(), "1^2,2^2,3^2,6^2");
  EXPECT_EQ(eq.weight(), 4);
  EXPECT_EQ(eq.q_order(), 1);
  EXPECT_THROW(EtaQuotient::parse("1^"), Error);
  EXPECT_THROW(EtaQuotient::parse("x"), Error);
}

TEST(EtaQuotient, FractionalOrder) {
  try {
    eta_quotient_series(EtaQuotient{{{1, 1}}}, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FractionalOrder);
  }
}

TEST(EtaQuotient, NegativeExponentsRoundTrip) {
  const auto inv = eta_quotient_series(EtaQuotient{{{2, 24}, {1, -24}}}, 40);
  const auto fwd = eta_quotient_series(EtaQuotient{{{1, 24}, {2, -24}}}, 40);
  const auto prod = inv * fwd;
  EXPECT_EQ(prod.leading_exponent(), 0);
  EXPECT_EQ(prod[0], 1);
  for (std::int64_t n = 1; n < prod.truncation(); ++n) ASSERT_EQ(prod[n], 0) << n;
}

TEST(QSeriesRing, LawsOnRandomSeries) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_series(rng, 0, 30), b = random_series(rng, 1, 25), c = random_series(rng, 2, 28);
    ASSERT_EQ(a * b, b * a);
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a * (b + c), a * b + a * c);
  }
}

TEST(QSeriesRing, InverseAndTruncation) {
  const auto u = eta_unit_series(30);
  const auto one = u * u.inverse();
  EXPECT_EQ(one[0], 1);
  for (std::int64_t n = 1; n < 30; ++n) EXPECT_EQ(one[n], 0);
  EXPECT_THROW(from_ints(0, {2, 1}).inverse(), Error);
  try {
    (void)u[30];
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncationTooShort);
  }
}

TEST(Hecke, RegistryDegreeSixPasses) {
  const auto form = registry_form(6);
  ASSERT_TRUE(form && form->eta);
  const auto s = eta_quotient_series(*form->eta, default_truncation(200));
  const auto r = hecke_validate(s, form->weight, form->level, 200);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.relations_checked, 100u);
  EXPECT_GT(r.deligne_checked, 40u);
  const auto ap = prime_coefficients(s, 13);
  EXPECT_EQ(ap.at(2), -2);
  EXPECT_EQ(ap.at(3), -3);
  EXPECT_EQ(ap.at(5), 6);
  EXPECT_EQ(ap.at(7), -16);
}

TEST(Hecke, DeltaPasses) {
  const auto s = eta_quotient_series(EtaQuotient{{{1, 24}}}, 120);
  EXPECT_TRUE(hecke_validate(s, 12, 1, 100).passed());
}

TEST(Hecke, NotNormalized) {
  try {
    hecke_validate(from_ints(0, std::vector<long long>(20, 1)), 2, 1, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNormalized);
  }
}

TEST(Hecke, ReportsBrokenMultiplicativity) {
  auto s = eta_quotient_series(EtaQuotient{{{1, 24}}}, 60);
  std::vector<BigInt> c = s.coeffs();
  c[5] += 1;  // a(6)
  const auto r = hecke_validate(QSeries(1, c), 12, 1, 40);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.failures.empty());
}

TEST(Hecke, TruncationTooShort) {
  const auto s = eta_quotient_series(EtaQuotient{{{1, 24}}}, 20);
  EXPECT_THROW(hecke_validate(s, 12, 1, 40), Error);
}

TEST(PrimeCoefficients, Examples) {
  const auto s = QSeries(1, eta_unit_series(30).coeffs());
  EXPECT_EQ(prime_coefficients(s, 20).at(2), -1);
  const auto zero = from_ints(1, std::vector<long long>(30, 0));
  for (const auto& [p, a] : prime_coefficients(zero, 29)) EXPECT_EQ(a, 0) << p;
  try {
    prime_coefficients(s, 40);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncationTooShort);
  }
}

TEST(Deligne, Bound) {
  EXPECT_TRUE(deligne_bound_holds(BigInt(-16), 7, 4));
  EXPECT_TRUE(deligne_bound_holds(BigInt(37), 7, 4));
  EXPECT_FALSE(deligne_bound_holds(BigInt(38), 7, 4));
  EXPECT_TRUE(deligne_bound_holds(BigInt(0), 2, 3));
}

TEST(CoefficientTable, JsonRoundTripAndLoad) {
  CoefficientTable t;
  t.label = "test";
  t.weight = 4;
  t.level = 6;
  t.entries = {{2, BigInt(-2)}, {3, BigInt(-3)}, {5, BigInt(6)}, {7, BigInt(-16)}};
  const auto back = CoefficientTable::from_json(t.to_json());
  EXPECT_EQ(back.entries, t.entries);
  EXPECT_EQ(back.label, "test");
  EXPECT_EQ(back.at(5), BigInt(6));
  EXPECT_FALSE(back.at(11).has_value());

  const auto dir = std::filesystem::temp_directory_path() / "klm_table_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ok.json") << t.to_json().dump();
  }
  EXPECT_EQ(CoefficientTable::load(dir / "ok.json").entries, t.entries);

  t.entries[5] = BigInt(23);
  {
    std::ofstream(dir / "bad.json") << t.to_json().dump();
  }
  try {
    CoefficientTable::load(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeFailure);
  }
  {
    std::ofstream(dir / "junk.json") << "{not json";
  }
  EXPECT_THROW(CoefficientTable::load(dir / "junk.json"), Error);
  EXPECT_THROW(CoefficientTable::load(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Registry, Entries) {
  for (unsigned d : {5u, 6u, 7u, 8u}) EXPECT_TRUE(registry_form(d).has_value());
  EXPECT_FALSE(registry_form(4).has_value());
  EXPECT_EQ(registry_form(8)->weight, 6u);
  EXPECT_EQ(registry_form(5)->level, 15u);
}
