#include <gtest/gtest.h>

#include <random>

#include "resurgence/known_series.hpp"
#include "resurgence/series.hpp"
#include "resurgence/series_json.hpp"

using namespace resurgence;

namespace {

ExactComplex q(long num, long den = 1) { return ScalarTraits<ExactComplex>::ratio(num, den); }

ExactSeries random_series(std::mt19937& rng, int order, bool with_constant) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  ExactSeries s(order);
  if (with_constant) s.constant() = ExactComplex(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
  for (int n = 0; n <= order; ++n) s.coeff(n) = ExactComplex(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
  for (int n = 0; n <= order; ++n) s.coeff(n).re.canonicalize(), s.coeff(n).im.canonicalize();
  s.constant().re.canonicalize();
  s.constant().im.canonicalize();
  return s;
}

}  // namespace

TEST(SeriesCore, EulerBorelIsAlternatingOnes) {
  auto b = borel(euler_series<ExactComplex>(20));
  for (int n = 0; n <= 20; ++n) EXPECT_EQ(b.coeffs[n], q(n % 2 ? -1 : 1));
}

TEST(SeriesCore, ZeroSeriesBorelIsZero) {
  auto b = borel(ExactSeries(7));
  for (const auto& c : b.coeffs) EXPECT_TRUE(c.is_zero());
}

TEST(SeriesCore, StirlingFirstBorelCoefficientIsOneTwelfth) {
  auto b = borel(stirling_series<ExactComplex>(10));
  EXPECT_EQ(b.coeffs[0], q(1, 12));
  // zeta^{-2}(zeta/2 coth(zeta/2) - 1) = sum_k B_{2k} zeta^{2k-2}/(2k)!
  auto B = bernoulli_numbers(12);
  auto fact = factorials<ExactComplex>(12);
  for (int n = 0; n <= 10; ++n) {
    if (n % 2) {
      EXPECT_TRUE(b.coeffs[n].is_zero());
    } else {
      EXPECT_EQ(b.coeffs[n], ExactComplex(B[n + 2]) / fact[n + 2]);
    }
  }
}

TEST(SeriesCore, BernoulliValues) {
  auto B = bernoulli_numbers(12);
  EXPECT_EQ(B[1], Rational(-1, 2));
  EXPECT_EQ(B[2], Rational(1, 6));
  EXPECT_EQ(B[4], Rational(-1, 30));
  EXPECT_EQ(B[12], Rational(-691, 2730));
  EXPECT_EQ(B[7], Rational(0));
}

TEST(SeriesCore, InverseBorelExamples) {
  BorelSeries<ExactComplex> delta{{q(1), q(0), q(0)}};
  auto s = inverse_borel(delta, q(0));
  EXPECT_EQ(s, ExactSeries::monomial(0, 2));

  BorelSeries<ExactComplex> alt;
  for (int n = 0; n <= 9; ++n) alt.coeffs.push_back(q(n % 2 ? -1 : 1));
  EXPECT_EQ(inverse_borel(alt, q(0)), euler_series<ExactComplex>(9));

  BorelSeries<ExactComplex> invfact;
  auto fact = factorials<ExactComplex>(6);
  for (int n = 0; n <= 6; ++n) invfact.coeffs.push_back(q(1) / fact[n]);
  auto t = inverse_borel(invfact, q(2));
  EXPECT_EQ(t.constant(), q(2));
  for (int n = 0; n <= 6; ++n) EXPECT_EQ(t.coeff(n), q(1));
}

TEST(SeriesCore, RoundTripExact) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_series(rng, 10, true);
    EXPECT_EQ(inverse_borel(borel(s), s.constant()), s);
  }
}

TEST(SeriesCore, FloatBorelReproducesCoefficients) {
  auto s = euler_series<cplx>(30);
  auto b = borel(s);
  auto f = factorials<cplx>(30);
  for (int n = 0; n <= 30; ++n) EXPECT_NEAR(std::abs(b.coeffs[n] * f[n] - s.coeff(n)) / std::abs(s.coeff(n)), 0.0, 1e-15);
}

TEST(SeriesCore, CauchyProductExamples) {
  auto zinv = ExactSeries::monomial(0, 4);
  EXPECT_EQ(zinv * zinv, ExactSeries::monomial(1, 4));

  auto one = ExactSeries::constant_series(q(1), 4);
  auto a = one + zinv;
  auto b = one - zinv;
  auto expect = one - ExactSeries::monomial(1, 4);
  EXPECT_EQ(a * b, expect);
}

TEST(SeriesCore, EulerSquaredMatchesDoubleLoop) {
  auto e = euler_series<ExactComplex>(5);
  auto p = e * e;
  // z^{-p-1} z^{-q-1} contributes to index p+q+1.
  std::vector<ExactComplex> oracle(6, q(0));
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j)
      if (i + j + 1 <= 5) oracle[i + j + 1] += e.coeff(i) * e.coeff(j);
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(p.coeff(n), oracle[n]);
}

TEST(SeriesCore, MinOrderPropagationAndReadsBeyondFail) {
  auto p = ExactSeries(3) + ExactSeries(7);
  EXPECT_EQ(p.order(), 3);
  EXPECT_EQ(cauchy_product(ExactSeries(5), ExactSeries(2)).order(), 2);
  EXPECT_THROW(p.coeff(4), Error);
  try {
    p.coeff(9);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncationExceeded);
  }
}

TEST(SeriesCore, HomomorphismIdentity) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto s1 = random_series(rng, 9, false), s2 = random_series(rng, 9, false);
    EXPECT_EQ(borel(s1 * s2), formal_convolution(borel(s1), borel(s2)));
  }
  auto e = euler_series<ExactComplex>(12);
  EXPECT_EQ(borel(e * e), formal_convolution(borel(e), borel(e)));
}

TEST(SeriesCore, DeriveExamples) {
  EXPECT_EQ(derive(ExactSeries::monomial(0, 4)), ExactSeries::monomial(1, 4, q(-1)));
  EXPECT_EQ(derive(ExactSeries::constant_series(q(5), 4)), ExactSeries(4));
  auto e = euler_series<ExactComplex>(10);
  EXPECT_EQ(borel(derive(e)), multiply_by_minus_zeta(borel(e)));
  EXPECT_EQ(derive(e).order(), 10);
}

TEST(SeriesCore, LeibnizAndRingAxioms) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_series(rng, 8, true), b = random_series(rng, 8, true), c = random_series(rng, 8, true);
    EXPECT_EQ(derive(a * b), derive(a) * b + a * derive(b));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a * b, b * a);
  }
}

TEST(SeriesCore, JsonRoundTripExactAndFloat) {
  auto e = euler_series<ExactComplex>(25);  // 25! does not fit in 64 bits
  e.constant() = ExactComplex(Rational(1, 3), Rational(-2, 7));
  auto j = series_to_json(e);
  auto back = std::get<ExactSeries>(series_from_json(json::parse(j.dump())));
  EXPECT_EQ(back, e);

  auto f = euler_series<cplx>(5);
  auto fj = series_to_json(f);
  auto fb = std::get<FloatSeries>(series_from_json(fj));
  EXPECT_EQ(fb, f);

  EXPECT_THROW(series_from_json(json::parse(R"({"mode":"exact","exact_coeffs":[[1,0,0,1]]})")), Error);
  EXPECT_THROW(series_from_json(json::parse(R"({"mode":"weird","coeffs":[]})")), Error);
}
