#include <gtest/gtest.h>

#include <set>

#include "klm/evans.hpp"

using namespace klm;

TEST(TraceMiddle, Examples) {
  const auto a = trace_middle(5, Prime(7));
  EXPECT_EQ(a.moment, -1);
  EXPECT_EQ(a.trace, Rational(0));
  EXPECT_TRUE(a.passed());

  const auto b = trace_middle(3, Prime(5));
  EXPECT_EQ(b.moment, 24);
  EXPECT_TRUE(b.divisible);
  EXPECT_EQ(b.trace, Rational(-1));
  EXPECT_TRUE(b.in_range);

  EXPECT_EQ(trace_middle(3, Prime(7)).trace, Rational(1));

  const auto c = trace_middle(2, Prime(5));
  EXPECT_EQ(c.trace, Rational(0));
  EXPECT_TRUE(c.in_range);
}

TEST(TraceMiddle, Preconditions) {
  try {
    trace_middle(5, Prime(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailure);
  }
  EXPECT_THROW(trace_middle(6, Prime(2)), Error);
  EXPECT_NO_THROW(trace_middle(5, Prime(2)));
}

TEST(TraceMiddle, RequireThrowsOnFailedCheck) {
  const auto good = trace_from_moment(5, Prime(17), BigInt(-1 - 2 * 17 * 17 * 17));
  EXPECT_TRUE(good.passed());
  EXPECT_EQ(good.trace, Rational(2));
  // the actual fifth moment at 17 is divisible by p^2 only
  const auto odd = trace_from_moment(5, Prime(17), BigInt(4045));
  EXPECT_FALSE(odd.divisible);
  try {
    odd.require();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivisibilityFailure);
  }
  const auto far = trace_from_moment(3, Prime(5), BigInt(-1 - 25 * 3));
  EXPECT_FALSE(far.in_range);
  try {
    far.require();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeFailure);
  }
}

TEST(TraceMiddle, ThirdMomentTracesLieInRange) {
  for (std::uint64_t q : primes_in_range(5, 120)) {
    const auto r = trace_middle(3, Prime(q));
    ASSERT_TRUE(r.divisible) << q;
    ASSERT_TRUE(r.in_range) << q;
  }
}

TEST(EvansD5, Examples) {
  for (std::uint64_t q : {7ULL, 11ULL, 13ULL}) {
    const auto r = evans_d5(Prime(q));
    EXPECT_EQ(r.derived_integer(), BigInt(0)) << q;
    EXPECT_TRUE(r.passed()) << q;
  }
  const auto r17 = evans_d5(Prime(17));
  EXPECT_EQ(*r17.moment, 4045);
  EXPECT_EQ(r17.derived_integer(), BigInt(-14));
  ASSERT_NE(r17.find("|a(p)| <= 2p"), nullptr);
  EXPECT_TRUE(r17.find("|a(p)| <= 2p")->pass);
  ASSERT_NE(r17.find("p | a(p)"), nullptr);
  EXPECT_FALSE(r17.find("p | a(p)")->pass);
}

TEST(EvansD5, ExcludedPrimes) {
  for (std::uint64_t q : {3ULL, 5ULL}) {
    try {
      evans_d5(Prime(q));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::PreconditionFailure);
    }
  }
}

TEST(EvansD5, InertPrimesVanish) {
  for (std::uint64_t q : primes_in_range(7, 150)) {
    if (jacobi_symbol(static_cast<std::int64_t>(q), 15) != -1) continue;
    const auto r = evans_d5(Prime(q));
    ASSERT_EQ(r.derived_integer(), BigInt(0)) << q;
  }
}

TEST(EvansD6, MatchesEtaQuotientUpTo200) {
  EvansPipeline pipeline;
  for (std::uint64_t q : primes_in_range(2, 200)) {
    const auto r = pipeline.d6(Prime(q));
    ASSERT_TRUE(r.passed()) << q << " " << r.to_json().dump();
    ASSERT_NE(r.find("a(p) = registry coefficient"), nullptr);
  }
  EXPECT_EQ(evans_d6(Prime(5)).derived_integer(), BigInt(6));
  EXPECT_EQ(evans_d6(Prime(7)).derived_integer(), BigInt(-16));
  EXPECT_EQ(*evans_d6(Prime(7)).moment, 783);
}

TEST(EvansD6, ImportedTableMismatchIsReported) {
  CoefficientTable t;
  t.label = "wrong";
  t.weight = 4;
  t.level = 6;
  t.entries = {{5, BigInt(-6)}};
  EvansOptions opt;
  opt.tables[6] = t;
  EvansPipeline pipeline(std::make_shared<MomentProvider>(), opt);
  const auto r = pipeline.d6(Prime(5));
  EXPECT_FALSE(r.passed());
}

TEST(EvansD7, Examples) {
  const auto r11 = evans_d7(Prime(11));
  EXPECT_EQ(*r11.moment, -14642);
  EXPECT_EQ(r11.derived, Rational(-1));
  EXPECT_TRUE(r11.passed());
  EXPECT_EQ(*evans_d7(Prime(13)).moment, 23828);
  const auto r2 = evans_d7(Prime(2));
  EXPECT_EQ(*r2.moment, 3);
  for (std::uint64_t q : {3ULL, 5ULL, 7ULL}) EXPECT_THROW(evans_d7(Prime(q)), Error);
}

TEST(EvansD7, TracesAreBoundedAndVaried) {
  EvansPipeline pipeline;
  std::set<Rational> seen;
  for (std::uint64_t q : primes_in_range(11, 200)) {
    const auto r = pipeline.d7(Prime(q));
    ASSERT_NE(r.find("t(p) in [-1, 3]"), nullptr);
    EXPECT_TRUE(r.find("t(p) in [-1, 3]")->pass) << q;
    EXPECT_TRUE(r.find("|m+1| < p^5-p^4-p^3")->pass) << q;
    seen.insert(*r.derived);
  }
  EXPECT_GT(seen.size(), 5u);
}

TEST(EvansD8, PinnedValues) {
  const auto r5 = evans_d8(Prime(5));
  EXPECT_EQ(*r5.moment, 1024);
  EXPECT_EQ(r5.derived_integer(), BigInt(-66));
  EXPECT_TRUE(r5.passed());
  const auto r7 = evans_d8(Prime(7));
  EXPECT_EQ(*r7.moment, -11026);
  EXPECT_EQ(r7.derived_integer(), BigInt(176));
  EXPECT_TRUE(r7.passed());
  try {
    evans_d8(Prime(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailure);
  }
}

TEST(EvansD8, OtherWeightParameter) {
  EvansOptions opt;
  opt.k8 = 4;
  EvansPipeline pipeline(std::make_shared<MomentProvider>(), opt);
  const auto r = pipeline.d8(Prime(5));
  EXPECT_EQ(r.derived_integer(), BigInt(-66 * 5));
  opt.k8 = 0;
  EXPECT_THROW(EvansPipeline(std::make_shared<MomentProvider>(), opt), Error);
}

TEST(EvansReport, SealWithholdsDerivedOnDivisibilityFailure) {
  EvansReport r;
  r.d = 5;
  r.p = 17;
  r.derived = Rational(1, 2);
  r.candidate = BigInt(3);
  r.add("div", CheckKind::Divisibility, false);
  r.seal();
  EXPECT_FALSE(r.derived.has_value());
  EXPECT_FALSE(r.candidate.has_value());
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.checks_failed(), 1u);
}

TEST(Batch, EmptyRangeAndBadRange) {
  const auto b = batch_report(8, 24, 28);
  EXPECT_TRUE(b.rows.empty());
  EXPECT_TRUE(b.all_pass());
  EXPECT_EQ(b.render_csv(), "p,m,derived,checks_passed,checks_failed,method\n");
  EXPECT_THROW(batch_report(8, 10, 5), Error);
}

TEST(Batch, DegreeEightAllPass) {
  EvansPipeline pipeline;
  const auto b = batch_report(8, 3, 100, pipeline, 2);
  EXPECT_EQ(b.rows.size(), 24u);
  EXPECT_TRUE(b.all_pass());
  EXPECT_FALSE(b.audit.performed);
  const auto j = b.to_json();
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["rows"].size(), 24u);
}

TEST(Batch, ErrorsBecomeRows) {
  const auto b = batch_report(5, 2, 7);
  ASSERT_EQ(b.rows.size(), 4u);
  EXPECT_FALSE(b.rows[0].error.has_value());
  EXPECT_TRUE(b.rows[1].error.has_value());
  EXPECT_TRUE(b.rows[2].error.has_value());
  EXPECT_TRUE(b.rows[3].passed());
  EXPECT_NE(b.render_csv().find("error"), std::string::npos);
}

TEST(Batch, FloatPathIsAudited) {
  MomentProvider::Options mo;
  mo.exact.exact_limit = 11;
  EvansPipeline pipeline(std::make_shared<MomentProvider>(mo), {});
  const auto b = batch_report(6, 2, 40, pipeline, 1);
  EXPECT_TRUE(b.all_pass());
  EXPECT_TRUE(b.audit.performed);
  EXPECT_GT(b.audit.p, 11u);
  EXPECT_TRUE(b.audit.pass);
  EXPECT_NE(b.render_csv().find("float-congruence"), std::string::npos);
}
