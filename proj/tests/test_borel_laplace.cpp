#include <gtest/gtest.h>

#include <boost/math/special_functions/expint.hpp>

#include "resurgence/borel_laplace.hpp"

using namespace resurgence;

namespace {

double euler_oracle(double z) { return std::exp(z) * boost::math::expint(1, z); }

double stirling_oracle(double z) {
  return std::lgamma(z) - (z - 0.5) * std::log(z) + z - 0.5 * std::log(2.0 * std::numbers::pi);
}

DirectionInterval narrow() { return {-0.1, 0.1, 0.5, 0.0}; }
DirectionInterval wide() { return {-0.35, 0.35, 0.5, 0.0}; }

}  // namespace

TEST(BorelLaplace, EulerOracle) {
  const auto s = registered_summable("euler", narrow());
  for (double z : {1.0, 2.0, 5.0}) {
    const auto v = laplace_sum(s, z, 0.0, 1e-11);
    EXPECT_NEAR(v.value.real(), euler_oracle(z), 1e-10) << z;
    EXPECT_NEAR(v.value.imag(), 0.0, 1e-14);
    EXPECT_LE(v.error_estimate, 1e-11);
  }
  EXPECT_NEAR(laplace_sum(s, 1.0, 0.0).value.real(), 0.5963474, 1e-7);
}

TEST(BorelLaplace, StirlingOracle) {
  const auto s = registered_summable("stirling", narrow());
  for (double z : {2.0, 4.0, 8.0}) EXPECT_NEAR(laplace_sum(s, z, 0.0, 1e-11).value.real(), stirling_oracle(z), 1e-10) << z;
  EXPECT_NEAR(laplace_sum(s, 2.0, 0.0).value.real(), 0.0413406, 1e-7);
}

TEST(BorelLaplace, ConstantSeries) {
  const auto c = constant_summable(cplx(3.0, -1.0), narrow());
  EXPECT_EQ(laplace_sum(c, 2.0, 0.0).value, cplx(3.0, -1.0));
  EXPECT_EQ(direction_independence_check(c, 2.0, -0.1, 0.1).checks[0].lhs, 0.0);
  EXPECT_EQ(seminorm_rho_tau(c, 0.5, 0.0).value, std::abs(cplx(3.0, -1.0)));
}

TEST(BorelLaplace, Errors) {
  auto s = registered_summable("euler", narrow());
  try {
    laplace_sum(s, cplx(-1.0, 0.0), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideHalfPlane);
  }
  EXPECT_THROW(laplace_sum(s, 2.0, 0.5), Error);
  s.certificate.reset();
  try {
    laplace_sum(s, 2.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TailBoundUnavailable);
  }
  EXPECT_THROW(DirectionInterval({-2.0, 2.0, 0.5, 0.0}).validate(), Error);
  EXPECT_THROW(DirectionInterval({0.1, 0.1, 0.5, 0.0}).validate(), Error);
  // The geometric germ has its pole on the ray of direction 0.
  EXPECT_THROW(registered_summable("geometric", narrow()), Error);
}

TEST(BorelLaplace, DirectionIndependence) {
  const auto e = registered_summable("euler", wide());
  const auto r1 = direction_independence_check(e, 2.0, -0.2, 0.2, 1e-10);
  EXPECT_TRUE(r1.all_pass());
  EXPECT_LT(r1.checks[0].lhs, 1e-8);
  const auto st = registered_summable("stirling", DirectionInterval{-0.1, 0.35, 0.5, 0.0});
  const auto r2 = direction_independence_check(st, cplx(3.0, 1.0), 0.0, 0.3, 1e-10);
  EXPECT_TRUE(r2.all_pass());
  EXPECT_LT(r2.checks[0].lhs, 1e-7);
}

TEST(BorelLaplace, Linearity) {
  const auto e = registered_summable("euler", narrow());
  const auto st = registered_summable("stirling", narrow());
  const GermPtr ge = e.germ, gs = st.germ;
  const auto combo = make_summable(
      "combo", 2.0 * e.series + st.series,
      std::make_shared<MeromorphicGerm>("combo", [ge, gs](cplx z) { return 2.0 * ge->eval_principal(z) + gs->eval_principal(z); },
                                        [ge, gs](cplx z) { return std::min(ge->singular_distance(z), gs->singular_distance(z)); }),
      narrow());
  for (cplx z : {cplx(2.0, 0.0), cplx(3.0, 1.5)})
    EXPECT_LT(std::abs(laplace_sum_best(combo, z).value - 2.0 * laplace_sum_best(e, z).value - laplace_sum_best(st, z).value), 1e-9);
}

TEST(BorelLaplace, GevreyExamples) {
  const auto e = registered_summable("euler", narrow());
  // Truncation error at z = 10, N = 5 is of the size 5! 10^{-6}.
  const auto r = gevrey_asymptotic_check(e, {10.0}, 5);
  const double err = r.extra["errors_at_N"][0].get<double>();
  EXPECT_GT(err, 0.2 * 120e-6);
  EXPECT_LT(err, 120e-6);
  const auto ray = gevrey_asymptotic_check(e, {6.0, 8.0, 10.0, 12.0, 16.0}, 5);
  EXPECT_TRUE(ray.all_pass()) << ray.to_json().dump();
  EXPECT_GT(ray.extra["C_prime"].get<double>(), 0.0);
  // z^{-1} has germ 1: the error vanishes from order 1 on.
  const auto one = registered_summable("one", narrow());
  const auto rp = gevrey_asymptotic_check(one, {3.0, 5.0}, 3);
  EXPECT_TRUE(rp.all_pass());
  for (const auto& v : rp.extra["errors_at_N"]) EXPECT_LT(v.get<double>(), 1e-12);
  const auto st = registered_summable("stirling", narrow());
  const auto rs = gevrey_asymptotic_check(st, {8.0, 10.0, 14.0}, 4);
  EXPECT_TRUE(rs.all_pass()) << rs.to_json().dump();
}

TEST(BorelLaplace, SeminormExamples) {
  const auto one = registered_summable("one", narrow());
  EXPECT_DOUBLE_EQ(seminorm_rho_tau(one, 0.5, 0.0).value, 1.0);
  EXPECT_DOUBLE_EQ(seminorm_rho_tau(one, 0.5, 2.0).value, 1.0);
  const auto e = registered_summable("euler", narrow());
  for (double rho : {0.3, 0.5, 0.8}) EXPECT_NEAR(seminorm_rho_tau(e, rho, 0.0).value, 1.0 / (1.0 - rho), 1e-12);
}

TEST(BorelLaplace, LaplaceEstimate) {
  const auto e = registered_summable("euler", narrow());
  const auto r = laplace_estimate_check(e, {cplx(2.0, 0.0), cplx(3.0, 2.0), cplx(1.5, -0.5)}, 1.0);
  EXPECT_TRUE(r.all_pass());
  EXPECT_THROW(laplace_estimate_check(constant_summable(1.0, narrow()), {2.0}, 1.0), Error);
}

TEST(BorelLaplace, ConvolutionExponentialBound) {
  // |phi1 * phi2 (zeta)| <= |zeta| C1 C2 e^{tau |zeta|} on rays, with C_j the sup of |phi_j|.
  const auto e = registered_summable("euler", narrow());
  const auto st = registered_summable("stirling", narrow());
  const double C1 = seminorm_rho_tau(e, 0.5, 0.0).value, C2 = seminorm_rho_tau(st, 0.5, 0.0).value;
  for (double t : {0.5, 2.0, 7.0, 20.0})
    for (double th : {-0.1, 0.0, 0.1}) {
      const cplx zeta = std::polar(t, th);
      const double v = std::abs(principal_convolution({e.germ, st.germ}, zeta, 1e-12).value);
      EXPECT_LE(v, t * C1 * C2);
    }
}

TEST(BorelLaplace, SlitPlaneGermMatchesClosedForm) {
  const auto b = borel(euler_series<ExactComplex>(60).without_constant());
  const auto g = SlitPlaneGerm::from_borel("euler_slit", b, Rational(1));
  for (cplx z : {cplx(0.3, 0.0), cplx(5.0, 0.0), cplx(12.0, 2.0), cplx(0.0, 3.0), cplx(-0.5, 0.4)})
    EXPECT_LT(std::abs(g->eval_principal(z) - 1.0 / (1.0 + z)), 1e-12) << z;
  EXPECT_NEAR(g->singular_distance(cplx(-3.0, 0.5)), 0.5, 1e-15);
  EXPECT_NEAR(g->singular_distance(cplx(2.0, 0.0)), 3.0, 1e-15);
}

TEST(BorelLaplace, ProductIdentity) {
  const auto e = registered_summable("euler", narrow());
  const auto st = registered_summable("stirling", narrow());
  SummableOpsOptions o;
  o.default_points = 4;
  const auto r = summable_ops_check(SummableOp::Product, {e, e}, o);
  EXPECT_TRUE(r.all_pass()) << r.to_json().dump();
  const auto r2 = summable_ops_check(SummableOp::Product, {e, st}, o);
  EXPECT_TRUE(r2.all_pass()) << r2.to_json().dump();
  // A constant factor: (2 + Euler) Euler.
  auto ec = e;
  ec.series.constant() = 2.0;
  const auto r3 = summable_ops_check(SummableOp::Product, {ec, e}, o);
  EXPECT_TRUE(r3.all_pass()) << r3.to_json().dump();
}

TEST(BorelLaplace, DerivativeIdentity) {
  const auto e = registered_summable("euler", narrow());
  SummableOpsOptions o;
  o.identity_tol = 1e-5;
  const auto r = summable_ops_check(SummableOp::Derivative, {e}, o);
  EXPECT_TRUE(r.all_pass()) << r.to_json().dump();
  o.derivative_order = 3;
  o.epsilon = 0.5;
  EXPECT_TRUE(summable_ops_check(SummableOp::Derivative, {e}, o).all_pass());
}

TEST(BorelLaplace, ComposeAndInvert) {
  const auto e = registered_summable("euler", narrow(), 20, 60);
  SummableOpsOptions o;
  o.identity_tol = 1e-6;
  const auto rc = summable_ops_check(SummableOp::Compose, {e, e}, o);
  EXPECT_TRUE(rc.all_pass()) << rc.to_json().dump();
  const auto one = registered_summable("one", narrow(), 20, 60);
  EXPECT_TRUE(summable_ops_check(SummableOp::Compose, {e, one}, o).all_pass());
  const auto ri = summable_ops_check(SummableOp::Invert, {e}, o);
  EXPECT_TRUE(ri.all_pass()) << ri.to_json().dump();
  // Inputs without a slit description are rejected.
  const auto st = registered_summable("stirling", narrow(), 20, 20);
  EXPECT_THROW(summable_ops_check(SummableOp::Invert, {st}, o), Error);
}

TEST(BorelLaplace, SubstituteExp) {
  const auto e = registered_summable("euler", narrow(), 20, 40);
  SummableOpsOptions o;
  o.exact_order = 40;
  Rational f = 1;
  for (int k = 0; k <= 41; ++k) {
    if (k > 0) f /= k;
    o.family.push_back(ExactComplex(f));
  }
  const auto r = summable_ops_check(SummableOp::Substitute, {e}, o);
  EXPECT_TRUE(r.all_pass()) << r.to_json().dump();
}

TEST(BorelLaplace, ImplicitCatalan) {
  SummableOpsOptions o;
  o.implicit_coeffs = {ExactComplex(Rational(-1)), ExactComplex(Rational(1))};
  const auto r = summable_ops_check(SummableOp::Implicit, {}, o);
  EXPECT_TRUE(r.all_pass()) << r.to_json().dump();
  EXPECT_NEAR(r.extra["growth"].get<double>(), 4.0, 0.2);
}
