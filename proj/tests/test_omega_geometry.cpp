#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "resurgence/omega.hpp"

using namespace resurgence;

namespace {

OmegaSet integers(double R) { return OmegaSet({cplx(1, 0), cplx(-1, 0)}, R); }

/// 0 -> 0.5 -> positive loop around 1 -> back to 0.5.
SurfacePath loop_around_one() {
  return SurfacePath({{0, 0}, {0.5, 0}, {1, -0.5}, {1.5, 0}, {1, 0.5}, {0.5, 0}});
}

}  // namespace

TEST(OmegaGeometry, EnumerationIntegersAndGaussian) {
  auto Z = integers(5);
  EXPECT_EQ(Z.points().size(), 11u);
  EXPECT_DOUBLE_EQ(Z.rho(), 1.0);
  auto G = OmegaSet({cplx(1, 0), cplx(0, 1)}, 3);
  // Non-negative combinations a + bi with a^2 + b^2 <= 9.
  int count = 0;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      if (a * a + b * b <= 9) ++count;
  EXPECT_EQ(static_cast<int>(G.points().size()), count);
  EXPECT_EQ(G.points()[0], cplx(0, 0));
}

TEST(OmegaGeometry, StabilityUnderAdditionWithinRadius) {
  auto G = OmegaSet({cplx(1, 0.3), cplx(-0.4, 1)}, 4);
  for (auto a : G.points())
    for (auto b : G.points())
      if (std::abs(a + b) <= G.radius() - 1e-9) { EXPECT_TRUE(G.contains(a + b)) << a << " + " << b; }
}

TEST(OmegaGeometry, RhoIndependentOfRadius) {
  std::vector<cplx> gens{cplx(0.7, 0.2), cplx(-0.3, 0.9)};
  const double r0 = OmegaSet(gens, 2 * 0.95).rho();
  for (double R : {2.5, 3.0, 4.5}) EXPECT_DOUBLE_EQ(OmegaSet(gens, R).rho(), r0);
}

TEST(OmegaGeometry, EtaExamples) {
  auto Z = integers(6);
  EXPECT_DOUBLE_EQ(Z.eta(0.5), 0.5);
  EXPECT_DOUBLE_EQ(Z.eta(2.0), 0.0);
  auto G = OmegaSet({cplx(1, 0), cplx(0, 1)}, 4);
  EXPECT_NEAR(G.eta(cplx(0.5, 0.5)), std::sqrt(2.0) / 2, 1e-15);
}

TEST(OmegaGeometry, EtaRadiusPrecondition) {
  auto Z = integers(3);
  EXPECT_NO_THROW(Z.eta(2.5));
  try {
    Z.eta(cplx(2.9, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RadiusExceeded);
  }
}

TEST(OmegaGeometry, EtaIsOneLipschitz) {
  auto G = OmegaSet({cplx(1, 0), cplx(0.5, 0.8)}, 8);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int k = 0; k < 2000; ++k) {
    cplx a(u(rng), u(rng)), b(u(rng), u(rng));
    EXPECT_LE(std::abs(G.eta(a) - G.eta(b)), std::abs(a - b) + 1e-14);
  }
}

TEST(OmegaGeometry, PrincipalSheetExamples) {
  auto Z = integers(6);
  EXPECT_TRUE(is_principal_sheet(SurfacePath::segment(0.5), Z));
  EXPECT_FALSE(is_principal_sheet(loop_around_one(), Z));
  auto sd = sheet_data(loop_around_one(), Z);
  for (std::size_t j = 0; j < Z.points().size(); ++j) EXPECT_EQ(sd.winding[j], Z.points()[j] == cplx(1, 0) ? 1 : 0);

  // Upper detour to 2.5: the segment [0, 2.5] is blocked by 1 and 2.
  SurfacePath detour({{0, 0}, {0.5, 0}, {0.5, 0.5}, {2.5, 0.5}, {2.5, 0}});
  auto dd = sheet_data(detour, Z);
  EXPECT_FALSE(dd.principal);
  for (std::size_t j = 0; j < Z.points().size(); ++j) {
    const auto w = Z.points()[j];
    const long expect = (w == cplx(1, 0) || w == cplx(2, 0)) ? -1 : 0;
    EXPECT_EQ(dd.winding[j], expect) << w;
  }
  EXPECT_TRUE(segment_blocked(2.5, Z));
  // A detour that avoids the real axis beyond 0 but ends off-axis is principal.
  EXPECT_TRUE(is_principal_sheet(SurfacePath({{0, 0}, {0.5, 0.5}, {2.5, 0.5}}), Z));
}

TEST(OmegaGeometry, PrincipalTestIsHomotopyInvariant) {
  auto Z = integers(6);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const auto base = loop_around_one().vertices();
  for (int trial = 0; trial < 50; ++trial) {
    auto v = base;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) v[k] += cplx(u(rng), u(rng));
    EXPECT_FALSE(is_principal_sheet(SurfacePath(v), Z));
    auto s = std::vector<cplx>{{0, 0}, cplx(0.25 + u(rng), u(rng)), {0.5, 0}};
    EXPECT_TRUE(is_principal_sheet(SurfacePath(s), Z));
  }
}

TEST(OmegaGeometry, UndecidableNearOmega) {
  auto Z = integers(6);
  SurfacePath grazing({{0, 0}, {1.0, 1e-12}, {1.5, 0.3}});
  try {
    is_principal_sheet(grazing, Z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndecidableNearOmega);
  }
}

TEST(OmegaGeometry, ROmegaExamples) {
  auto Z = integers(6);
  EXPECT_DOUBLE_EQ(r_omega(SurfacePath::segment(0.5), Z), 0.5);
  SurfacePath to03({{0, 0}, {0.5, 0}, {1, -0.5}, {1.5, 0}, {1, 0.5}, {0.3, 0}});
  EXPECT_NEAR(r_omega(to03, Z), 0.3, 1e-15);
  auto G = OmegaSet({cplx(1, 0), cplx(0, 1)}, 6);
  EXPECT_NEAR(r_omega(SurfacePath({{0, 0}, {1.5, 0.2}, {1.5, 1.0}}), G), 0.5, 1e-15);
}

TEST(OmegaGeometry, ROmegaNeverExceedsNonzeroDistance) {
  auto G = OmegaSet({cplx(1, 0), cplx(0.3, 1)}, 8);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 200; ++k) {
    std::vector<cplx> v{{0, 0}, cplx(u(rng), u(rng)), cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
    SurfacePath p(v);
    try {
      const double r = r_omega(p, G);
      EXPECT_LE(r, G.eta_nonzero(p.endpoint()));
      if (!is_principal_sheet(p, G)) { EXPECT_DOUBLE_EQ(r, G.eta(p.endpoint())); }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UndecidableNearOmega);
    }
  }
}

TEST(OmegaGeometry, BoundConstants) {
  auto c = convolution_bound_constants(0.5, 2, 1);
  EXPECT_NEAR(c.C / std::exp(27.0), 1.0, 1e-14);
  EXPECT_NEAR(c.delta_prime / (0.5 * std::exp(-18.0)), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(c.L_prime, 2.25);
  auto c0 = convolution_bound_constants(0.5, 0, 1);
  EXPECT_NEAR(c0.C, std::exp(3.0), 1e-12);
  EXPECT_NEAR(c0.delta_prime, 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(c0.L_prime, 0.25);
  auto p = unit_prepended_bound_constants(0.4, 2, 1);
  EXPECT_NEAR(p.factor, std::exp(15.0), 1e-6);
  EXPECT_NEAR(p.delta_prime, 0.5 * std::exp(-10.0), 1e-18);
  EXPECT_THROW(convolution_bound_constants(1.0, 1, 1), Error);
  EXPECT_THROW(unit_prepended_bound_constants(0.5, 1, 1), Error);
}

TEST(OmegaGeometry, KdlMembershipExamples) {
  auto Z = integers(6);
  AdmissibilityWitness w{SurfacePath::segment(0.4), 0.3, 1.0, {}, 0};
  EXPECT_TRUE(check_kdl_membership(w, Z));
  EXPECT_NEAR(w.min_r_omega, 0.6, 1e-12);
  EXPECT_EQ(w.vertex_r_omega.size(), 2u);
  w.delta = 0.7;
  EXPECT_FALSE(check_kdl_membership(w, Z));
  AdmissibilityWitness longw{SurfacePath::segment(0.4), 0.3, 0.3, {}, 0};
  EXPECT_FALSE(check_kdl_membership(longw, Z));

  // L + delta < rho: every point of the closed disc of radius L qualifies.
  const double L = 0.6, delta = 0.3;
  for (int k = 0; k < 24; ++k) {
    AdmissibilityWitness d{SurfacePath::segment(std::polar(L, 2 * std::numbers::pi * k / 24)), delta, L, {}, 0};
    EXPECT_TRUE(check_kdl_membership(d, Z)) << k << " " << d.min_r_omega;
  }
}

TEST(OmegaGeometry, KdlLoopSeesOriginOffPrincipalSheet) {
  auto Z = integers(6);
  AdmissibilityWitness w{loop_around_one(), 0.2, 10, {}, 0};
  EXPECT_TRUE(check_kdl_membership(w, Z));
  EXPECT_NEAR(w.vertex_r_omega.back(), 0.5, 1e-12);
  AdmissibilityWitness to03{SurfacePath({{0, 0}, {0.5, 0}, {1, -0.5}, {1.5, 0}, {1, 0.5}, {0.3, 0}}), 0.35, 10, {}, 0};
  EXPECT_FALSE(check_kdl_membership(to03, Z));  // R_Omega = 0.3 at the end
}

TEST(OmegaGeometry, KdlMonotonicity) {
  auto G = OmegaSet({cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)}, 8);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  int passed = 0;
  for (int k = 0; k < 100; ++k) {
    SurfacePath p({{0, 0}, cplx(u(rng), u(rng)), cplx(u(rng), u(rng))});
    AdmissibilityWitness strict{p, 0.2, 3.0, {}, 0};
    if (!check_kdl_membership(strict, G)) continue;
    ++passed;
    AdmissibilityWitness loose{p, 0.1, 4.0, {}, 0};
    EXPECT_TRUE(check_kdl_membership(loose, G));
  }
  EXPECT_GT(passed, 5);
}

TEST(OmegaGeometry, PathParsingAndValidation) {
  std::istringstream in("0,0\n0.5,0\n# comment\n\n1,0.5\n");
  auto p = SurfacePath::from_csv(in);
  EXPECT_EQ(p.vertices().size(), 3u);
  EXPECT_NEAR(p.arc_length(), 0.5 + std::sqrt(0.5), 1e-15);
  EXPECT_EQ(p.at_length(0.25), cplx(0.25, 0));
  std::istringstream bad("0,0\nfoo\n");
  EXPECT_THROW(SurfacePath::from_csv(bad), Error);
  EXPECT_THROW(SurfacePath({{1, 0}, {2, 0}}), Error);
  auto Z = integers(4);
  EXPECT_THROW(SurfacePath::segment(1.5).validate(Z), Error);
  EXPECT_NO_THROW(SurfacePath::segment(0.5).validate(Z));
  auto j = nlohmann::json::parse(R"({"generators": [[1,0]], "radius": 5})");
  auto O = OmegaSet::from_json(j);
  EXPECT_EQ(O.points().size(), 6u);
  EXPECT_THROW(OmegaSet::from_json(nlohmann::json::parse(R"({"radius": 5})")), Error);
}
