#include <gtest/gtest.h>

#include <random>

#include "resurgence/nonlinear.hpp"

using namespace resurgence;

namespace {

using Q = ExactComplex;
using ES = ExactSeries;

Rational rat(long n, long d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

Q q(long n, long d = 1) { return Q(rat(n, d)); }

ES monomial(int k, int order, Q v = q(1)) { return ES::monomial(k, order, v); }

ES random_series(std::mt19937& rng, int order, bool constant) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  ES s(order);
  auto draw = [&] {
    const int a = num(rng), b = den(rng), c = num(rng), d = den(rng);
    return Q(rat(a, b), rat(c, d));
  };
  if (constant) s.constant() = draw();
  for (int n = 0; n <= order; ++n) s.coeff(n) = draw();
  return s;
}

FormalDiffeo<Q> random_diffeo(std::mt19937& rng, int order) { return {random_series(rng, order, true)}; }

ConvergentFamily<Q> random_family(std::mt19937& rng, int vars, int depth, int order) {
  ConvergentFamily<Q> f(vars, depth, order);
  std::vector<MultiIndex> ks;
  MultiIndex k(vars, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == vars) {
      ks.push_back(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, depth);
  for (const auto& kk : ks) f.set(kk, random_series(rng, order, true));
  return f;
}

bool is_identity(const FormalDiffeo<Q>& f) { return f == FormalDiffeo<Q>::identity(f.order()); }

}  // namespace

TEST(NonlinearOps, SubstituteExp) {
  const int N = 10;
  const auto H = ConvergentFamily<Q>::exp_family(required_depth(N), N);
  const ES e = substitute(H, {monomial(0, N)});
  // exp(1/z) = sum z^{-m}/m!: constant 1, coefficient n is 1/(n+1)!.
  EXPECT_EQ(e.constant(), q(1));
  for (int n = 0; n <= N; ++n) EXPECT_EQ(e.coeff(n), Q(1 / detail::factorial_q(n + 1))) << n;
}

TEST(NonlinearOps, SubstituteReciprocal) {
  const int N = 12;
  const Q c = q(3, 2);
  const auto H = ConvergentFamily<Q>::reciprocal_family(c, required_depth(N), N);
  const ES phi = euler_series<Q>(N);
  const ES inv = substitute(H, {phi});
  ES cphi = phi;
  cphi.constant() = c;
  EXPECT_EQ(cauchy_product(cphi, inv), ES::constant_series(q(1), N));
}

TEST(NonlinearOps, SubstituteZeroArgsAndErrors) {
  std::mt19937 rng(3);
  const int N = 6;
  const auto H = random_family(rng, 2, required_depth(N), N);
  EXPECT_EQ(substitute(H, {ES(N), ES(N)}), H.get({0, 0}));
  ES withc = monomial(0, N);
  withc.constant() = q(1);
  try {
    substitute(H, {withc, ES(N)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstantTermPresent);
  }
  const auto shallow = random_family(rng, 2, N, N);
  try {
    substitute(shallow, {monomial(0, N), ES(N)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientFamilyDepth);
  }
  EXPECT_THROW(shallow.get({N, 1}), Error);
}

TEST(NonlinearOps, SubstituteIsHomomorphism) {
  std::mt19937 rng(11);
  const int N = 7;
  for (int t = 0; t < 3; ++t) {
    const auto H1 = random_family(rng, 2, required_depth(N), N);
    const auto H2 = random_family(rng, 2, required_depth(N), N);
    const std::vector<ES> args{random_series(rng, N, false), random_series(rng, N, false)};
    EXPECT_EQ(substitute(H1 * H2, args), cauchy_product(substitute(H1, args), substitute(H2, args)));
  }
}

TEST(NonlinearOps, FamilyJsonRoundTrip) {
  std::mt19937 rng(5);
  auto H = random_family(rng, 2, 3, 4);
  H.growth = GrowthCertificate{2.0, 3.0};
  const auto back = ConvergentFamily<Q>::from_json(json::parse(H.to_json().dump()));
  EXPECT_EQ(back.terms(), H.terms());
  ASSERT_TRUE(back.growth.has_value());
  EXPECT_EQ(back.growth->B, 3.0);
  EXPECT_NEAR(substitution_bound(*back.growth, 1.0, {0.5}), 2.0 * std::exp(1.5), 1e-12);
}

namespace {

/// F(x, y) from polynomial coefficients F[k] = coefficient of y^k as a series in x = 1/z.
ConvergentFamily<Q> family_from(const std::vector<ES>& F, int N) {
  ConvergentFamily<Q> f(1, required_depth(N), N);
  for (std::size_t k = 0; k < F.size(); ++k) f.set({int(k)}, F[k]);
  return f;
}

}  // namespace

TEST(NonlinearOps, ImplicitLinear) {
  const int N = 8;
  // -y + x: phi = x = z^{-1}.
  const ES phi = implicit_solve(family_from({monomial(0, N), ES::constant_series(q(-1), N)}, N));
  EXPECT_EQ(phi, monomial(0, N));
}

TEST(NonlinearOps, ImplicitCatalan) {
  const int N = 10;
  const ES phi = implicit_solve(
      family_from({monomial(0, N), ES::constant_series(q(-1), N), ES::constant_series(q(1), N)}, N));
  const long catalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796};
  for (int n = 0; n <= N; ++n) EXPECT_EQ(phi.coeff(n), q(catalan[n])) << n;
  EXPECT_FALSE(phi.has_constant_term());
}

TEST(NonlinearOps, ImplicitGeometric) {
  const int N = 9;
  // -y + x + x y: phi = x/(1-x).
  ES lin = ES::constant_series(q(-1), N);
  lin.coeff(0) = q(1);
  const ES phi = implicit_solve(family_from({monomial(0, N), lin}, N));
  for (int n = 0; n <= N; ++n) EXPECT_EQ(phi.coeff(n), q(1));
}

TEST(NonlinearOps, ImplicitGeneralResidualVanishes) {
  std::mt19937 rng(21);
  const int N = 7;
  for (int t = 0; t < 3; ++t) {
    std::vector<ES> F;
    F.push_back(random_series(rng, N, false));
    F.push_back(random_series(rng, N, false));
    F[1].constant() = q(2, 3);
    for (int k = 2; k <= required_depth(N); ++k) F.push_back(random_series(rng, N, true));
    const auto fam = family_from(F, N);
    const ES phi = implicit_solve(fam);
    EXPECT_EQ(substitute(fam, {phi}), ES(N));
  }
}

TEST(NonlinearOps, ImplicitErrors) {
  const int N = 5;
  try {
    implicit_solve(family_from({monomial(0, N), ES(N), ES::constant_series(q(1), N)}, N));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLinearPart);
  }
  EXPECT_THROW(implicit_solve(family_from({ES::constant_series(q(1), N), ES::constant_series(q(-1), N)}, N)), Error);
}

TEST(NonlinearOps, TranslateExamples) {
  const int N = 8;
  const Q c = q(-2, 3);
  const ES t = translate(monomial(0, N), c);
  // 1/(z + c) = sum (-c)^j z^{-j-1}.
  Q p = q(1);
  for (int j = 0; j <= N; ++j) {
    EXPECT_EQ(t.coeff(j), p);
    p = p * (-c);
  }
}

TEST(NonlinearOps, ComposeExamples) {
  const int N = 10;
  std::mt19937 rng(2);
  const auto f = random_diffeo(rng, N);
  const auto id = FormalDiffeo<Q>::identity(N);
  EXPECT_EQ(compose(f, id), f);
  EXPECT_EQ(compose(id, f), f);
  const auto s = compose(FormalDiffeo<Q>::shift(q(2), N), FormalDiffeo<Q>::shift(q(-1, 3), N));
  EXPECT_EQ(s, FormalDiffeo<Q>::shift(q(5, 3), N));
  // (z + 1/z) o (z + 1/z) = z + 2/z - z^{-3} + z^{-5} - ...
  const FormalDiffeo<Q> g{monomial(0, N)};
  const auto gg = compose(g, g);
  EXPECT_EQ(gg.phi.constant(), q(0));
  EXPECT_EQ(gg.phi.coeff(0), q(2));
  for (int n = 1; n <= N; ++n) EXPECT_EQ(gg.phi.coeff(n), n % 2 ? q(0) : q(n % 4 == 2 ? -1 : 1)) << n;
}

TEST(NonlinearOps, InvertExamples) {
  const int N = 12;
  EXPECT_EQ(invert(FormalDiffeo<Q>::identity(N)), FormalDiffeo<Q>::identity(N));
  EXPECT_EQ(invert(FormalDiffeo<Q>::shift(q(7, 5), N)), FormalDiffeo<Q>::shift(q(-7, 5), N));
  const FormalDiffeo<Q> g{monomial(0, N)};
  EXPECT_TRUE(is_identity(compose(g, invert(g))));
  EXPECT_TRUE(is_identity(compose(invert(g), g)));
}

TEST(NonlinearOps, GroupLawsRandom) {
  const int N = 16;
  std::mt19937 rng(17);
  for (int t = 0; t < 4; ++t) {
    const auto f = random_diffeo(rng, N);
    const auto h = invert(f);
    EXPECT_TRUE(is_identity(compose(h, f)));
    EXPECT_TRUE(is_identity(compose(f, h)));
  }
  for (int t = 0; t < 2; ++t) {
    const auto a = random_diffeo(rng, N), b = random_diffeo(rng, N), c = random_diffeo(rng, N);
    EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
  }
}

TEST(NonlinearOps, FloatModeMatchesExact) {
  const int N = 10;
  std::mt19937 rng(8);
  const auto f = random_diffeo(rng, N);
  const FormalDiffeo<cplx> ff{to_float(f.phi)};
  const auto exact = to_float(invert(f).phi);
  const auto flt = invert(ff).phi;
  for (int n = 0; n <= N; ++n) EXPECT_NEAR(std::abs(exact.coeff(n) - flt.coeff(n)), 0.0, 1e-9 * (1 + std::abs(exact.coeff(n))));
}

TEST(NonlinearOps, ProductWithGain) {
  const int N = 8;
  // Constants only: plain product.
  const auto p = product_with_gain<Q>({ES::constant_series(q(2), N), ES::constant_series(q(3), N)}, 0);
  EXPECT_EQ(p.product, ES::constant_series(q(6), N));
  EXPECT_FALSE(p.report.has_value());
  EXPECT_THROW(product_with_gain<Q>({ES::constant_series(q(2), N), monomial(0, N)}, 2), Error);
  // z^{-1} z^{-1} = z^{-2}, Borel zeta; K a small principal disc.
  GainCheckData d{OmegaSet({cplx(1, 0), cplx(-1, 0)}, 6.0), 0.3, 0.5, {}, 40, {}};
  const auto g = product_with_gain<Q>({monomial(0, N), monomial(0, N)}, 2, &d);
  EXPECT_EQ(g.product, monomial(1, N));
  ASSERT_TRUE(g.report.has_value());
  EXPECT_TRUE(g.report->all_pass());
  // max |zeta| over the sampled disc of radius 0.5 is at most 0.5.
  EXPECT_LE(g.report->checks[0].lhs, 0.5 + 1e-12);
  EXPECT_GT(g.report->checks[0].lhs, 0.45);
  // Subset expansion of (c1 + phi1) phi2 phi3 agrees with the direct product.
  std::mt19937 rng(4);
  const std::vector<ES> fs{random_series(rng, N, true), random_series(rng, N, false), random_series(rng, N, false)};
  EXPECT_EQ(subset_expansion_product(fs), product_with_gain(fs, 1).product);
  const std::vector<ES> gs{random_series(rng, N, true), random_series(rng, N, true)};
  EXPECT_EQ(subset_expansion_product(gs), product_with_gain(gs, 0).product);
}
