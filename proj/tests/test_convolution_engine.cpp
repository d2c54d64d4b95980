#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "resurgence/bounds.hpp"
#include "resurgence/convolution.hpp"
#include "resurgence/germ.hpp"

using namespace resurgence;

namespace {

const double kPi = std::numbers::pi;

OmegaSet integers(double radius = 4.0) { return OmegaSet({cplx(1.0, 0.0)}, radius); }

/// 0 -> 0.5, then a positive polygonal loop around 1 of radius 0.5, back to 0.5.
SurfacePath loop_around_one(int sides = 48, double r = 0.5) {
  std::vector<cplx> v{cplx(0, 0), cplx(1.0 - r, 0)};
  for (int k = 1; k <= sides; ++k) v.push_back(1.0 - r * std::polar(1.0, 2.0 * kPi * k / sides));
  return SurfacePath(v);
}

/// Same class as loop_around_one but an axis-parallel rectangle.
SurfacePath box_loop_around_one() {
  return SurfacePath({{0, 0}, {0.5, 0}, {0.5, -0.6}, {1.6, -0.6}, {1.6, 0.7}, {0.5, 0.7}, {0.5, 0}});
}

cplx dilog_series(cplx x) {
  cplx acc = 0.0, p = x;
  for (int k = 1; k < 400; ++k, p *= x) acc += p / double(k * k);
  return acc;
}

/// 1*g*g for g = 1/(1-zeta) continued once around 1 in the positive sense.
cplx two_fold_loop_oracle(cplx z) {
  const cplx lg = std::log(1.0 - z) + cplx(0.0, 2.0 * kPi);
  return 2.0 * (lg * std::log(2.0 - z) + dilog_series(z - 1.0) + kPi * kPi / 12.0);
}

}  // namespace

TEST(ConvolutionEngine, PrincipalExamples) {
  auto one = make_one_germ(), geo = make_geometric_germ();
  EXPECT_NEAR(std::abs(principal_convolution({one, one}, cplx(0.7, 0.2), 1e-12).value - cplx(0.7, 0.2)), 0.0, 1e-13);
  const auto v = principal_convolution({geo, geo}, 0.5, 1e-12);
  EXPECT_NEAR(v.value.real(), -2.0 * std::log(0.5) / 1.5, 1e-12);
  EXPECT_NEAR(v.value.real(), 0.9241962, 1e-7);
  // Monomial rule (zeta^a/a!) * (zeta^b/b!) = zeta^{a+b+1}/(a+b+1)!.
  auto mono = [](int a) {
    return MeromorphicGerm::with_poles("mono", [a](cplx z) { return std::pow(z, a) / std::tgamma(a + 1.0); }, {});
  };
  const cplx z(0.4, -0.3);
  for (auto [a, b] : {std::pair{0, 0}, {1, 2}, {3, 1}}) {
    const cplx got = principal_convolution({mono(a), mono(b)}, z, 1e-13).value;
    EXPECT_NEAR(std::abs(got - std::pow(z, a + b + 1) / std::tgamma(a + b + 2.0)), 0.0, 1e-13);
  }
}

TEST(ConvolutionEngine, PrincipalOracleOnDisc) {
  auto geo = make_geometric_germ();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const cplx z = std::polar(0.8 * std::sqrt(u(rng)), 2.0 * kPi * u(rng));
    const cplx oracle = -2.0 * std::log(1.0 - z) / (2.0 - z);
    EXPECT_NEAR(std::abs(principal_convolution({geo, geo}, z, 1e-11).value - oracle), 0.0, 1e-8) << z;
  }
}

TEST(ConvolutionEngine, BlockedSegment) {
  auto geo = make_geometric_germ();
  const OmegaSet om = integers();
  try {
    principal_convolution({geo, geo}, 1.5, 1e-8, &om);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathBlocked);
  }
  EXPECT_THROW(principal_convolution({geo}, 1.5, 1e-8), Error);
}

TEST(ConvolutionEngine, UnitPrependExamples) {
  auto one = make_one_germ(), geo = make_geometric_germ();
  EXPECT_NEAR(std::abs(unit_prepend_convolution({one}, 0.6, 1e-12).value - 0.6), 0.0, 1e-14);
  EXPECT_NEAR(unit_prepend_convolution({geo}, 0.5, 1e-12).value.real(), -std::log(0.5), 1e-12);
  // d/dzeta (1*phi) = phi.
  for (cplx z : {cplx(0.3, 0.1), cplx(-0.4, 0.5)}) {
    const double h = 1e-4;
    const cplx d = (unit_prepend_convolution({geo, geo}, z + h, 1e-13).value -
                    unit_prepend_convolution({geo, geo}, z - h, 1e-13).value) / (2.0 * h);
    EXPECT_NEAR(std::abs(d - principal_convolution({geo, geo}, z, 1e-13).value), 0.0, 1e-7);
  }
}

TEST(ConvolutionEngine, SimplexGridWeights) {
  for (int n = 1; n <= 5; ++n) {
    const auto g = SimplexGrid::make(n, n <= 3 ? 2 : 0);
    EXPECT_NEAR(g.weight_sum(), 1.0 / std::tgamma(n + 1.0), 1e-12);
  }
  for (int n = 1; n <= 4; ++n)
    for (int m : {1, 2, 4}) EXPECT_EQ(detail::lattice_pieces(n, m).size(), std::size_t(std::pow(m, n)));
}

TEST(ConvolutionEngine, FlowExamples) {
  const OmegaSet om = integers();
  const auto ip = prepare_isotopy_path(loop_around_one(), om);
  FlowOptions fo;
  fo.record = true;
  // All-zero node stays at 0.
  auto z = integrate_isotopy(ip, om, {0.0, 0.0}, nullptr, fo);
  for (const auto& smp : z.samples) {
    EXPECT_EQ(smp.xi[0], cplx(0.0));
    EXPECT_EQ(smp.xi[1], cplx(0.0));
  }
  // Node on the face s1 + s2 = 1 keeps S_n = gamma(t).
  auto f = integrate_isotopy(ip, om, {0.3, 0.7}, nullptr, fo);
  EXPECT_LE(f.max_sum_residual, 1e-9);
  EXPECT_NEAR(std::abs(f.xi[0] + f.xi[1] - ip.endpoint()), 0.0, 1e-9);
  // n = 1, s = 1: the component is gamma itself.
  auto g = integrate_isotopy(ip, om, {1.0}, nullptr, fo);
  EXPECT_NEAR(std::abs(g.xi[0] - ip.endpoint()), 0.0, 1e-9);
  EXPECT_GE(f.min_D, ip.delta);
}

TEST(ConvolutionEngine, MonodromySingleFactor) {
  const OmegaSet om = integers();
  auto geo = make_geometric_germ();
  ContinuationOptions opt;
  opt.level = 2;
  const auto r = continued_convolution({geo}, loop_around_one(), om, opt);
  EXPECT_NEAR(std::abs(r.value - (-std::log(0.5) - cplx(0.0, 2.0 * kPi))), 0.0, 1e-6) << r.value;
}

TEST(ConvolutionEngine, MonodromyTwoFactors) {
  const OmegaSet om = integers();
  auto geo = make_geometric_germ();
  ContinuationOptions opt;
  opt.level = 2;
  opt.tol = 1e-5;
  const auto r = continued_convolution({geo, geo}, loop_around_one(), om, opt);
  EXPECT_NEAR(std::abs(r.value - two_fold_loop_oracle(0.5)), 0.0, 1e-5) << r.value << " vs " << two_fold_loop_oracle(0.5);
  const auto r2 = continued_convolution({geo, geo}, box_loop_around_one(), om, opt);
  EXPECT_NEAR(std::abs(r.value - r2.value), 0.0, 2e-5);
}

TEST(ConvolutionEngine, PrincipalCrossMethod) {
  const OmegaSet om = integers();
  auto geo = make_geometric_germ(), eul = make_euler_germ();
  const SurfacePath p({{0, 0}, {0.3, 0.4}, {0.6, 0.1}, {0.5, 0}});
  ContinuationOptions opt;
  opt.level = 1;
  for (const auto& germs : {std::vector<GermPtr>{geo}, {geo, eul}, {geo, geo, eul}}) {
    const cplx a = continued_convolution(germs, p, om, opt).value;
    const cplx b = unit_prepend_convolution(germs, 0.5, 1e-12).value;
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-7) << germs.size();
  }
}

TEST(ConvolutionEngine, TensorRouteAgrees) {
  const OmegaSet om = integers();
  auto geo = make_geometric_germ();
  ContinuationOptions opt;
  opt.method = ContinuationOptions::Method::Tensor;
  opt.level = 3;
  opt.enforce_tolerance = false;
  const auto r = continued_convolution({geo}, loop_around_one(), om, opt);
  // The tensor rule differentiates the flow numerically, so it is only a coarse cross-check; its
  // actual error must stay within its own refinement estimate.
  const double err = std::abs(r.value - (-std::log(0.5) - cplx(0.0, 2.0 * kPi)));
  EXPECT_LE(err, r.error_estimate) << r.value;
  EXPECT_LE(err, 0.05);
}

TEST(ConvolutionEngine, DeconvolveUnitExamples) {
  EXPECT_NEAR(std::abs(deconvolve_unit([](cplx z) { return z; }, 0.2, 0.1) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(deconvolve_unit([](cplx z) { return -std::log(1.0 - z); }, 0.5, 0.2) - 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(deconvolve_unit([](cplx z) { return 0.5 * z * z; }, 0.3, 0.1) - 0.3), 0.0, 1e-14);
}

TEST(ConvolutionEngine, FlowEstimatesReport) {
  const OmegaSet om = integers();
  const auto ip = prepare_isotopy_path(loop_around_one(24), om);
  FlowOptions fo;
  fo.record = true;
  fo.jacobian = true;
  std::vector<FlowNode> nodes;
  for (auto s : std::vector<std::vector<double>>{{0.0, 0.0}, {0.5, 0.5}, {0.2, 0.3}, {0.0, 1.0}, {0.9, 0.05}})
    nodes.push_back(integrate_isotopy(ip, om, s, nullptr, fo));
  const Report rep = check_flow_estimates(ip, om, nodes);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.to_json().dump();
  std::ostringstream csv;
  write_trajectory_csv(csv, nodes);
  EXPECT_NE(csv.str().find("node_id,t,i,re,im,D"), std::string::npos);
}

TEST(ConvolutionEngine, KMaxSampling) {
  const OmegaSet om({cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 6.0);
  auto geo = make_geometric_germ();
  const auto m = estimate_k_max(*geo, om, 0.01, 1.5);
  // Sup is 1/0.01, approached from outside the excluded disc around 1.
  EXPECT_GT(m.value, 99.0);
  EXPECT_LE(m.value, 100.0);
  EXPECT_GT(m.samples, 1000u);
  EXPECT_NEAR(estimate_k_max(*make_one_germ(), om, 0.01, 1.5).value, 1.0, 0.0);
  EXPECT_EQ(germ_multisets({geo, geo, geo}, 4).size(), 15u);
  EXPECT_EQ(germ_multisets({geo, geo}, 3).size(), 4u);
}

TEST(ConvolutionEngine, BoundReports) {
  const OmegaSet om({cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 6.0);
  auto one = make_one_germ(), eul = make_euler_germ(), geo = make_geometric_germ();
  BoundOptions opt;
  opt.witnesses = 50;
  // Constant germs: the left-hand side is |zeta|^n/n! exactly.
  const auto w = sample_k_witnesses(om, opt.delta, opt.L, opt.witnesses);
  ASSERT_EQ(w.size(), 50u);
  for (const auto& p : w) EXPECT_TRUE(is_principal_sheet(p, om));
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::vector<GermPtr> g(n, one);
    const Report r = check_unit_prepended_bound(g, om, opt);
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_TRUE(r.all_pass());
    EXPECT_EQ(r.checks[0].samples, 50u);
    EXPECT_LE(r.checks[0].lhs, std::pow(opt.L, double(n)) / std::tgamma(n + 1.0) + 1e-9);
    EXPECT_TRUE(check_convolution_bound(g, om, opt).all_pass());
  }
  const Report pr = check_principal_sheet_bound({eul, eul}, om, opt);
  EXPECT_TRUE(pr.all_pass()) << pr.to_json().dump();
  EXPECT_GT(pr.checks[0].samples, 40u);
  // Constant germs attain the principal-sheet bound.
  const Report pc = check_principal_sheet_bound({one, one}, om, opt);
  EXPECT_TRUE(pc.all_pass());
  EXPECT_NEAR(pc.checks[0].margin(), 1.0, 1e-6);
  EXPECT_TRUE(check_unit_prepended_bound({eul, geo}, om, opt).all_pass());
}
