#pragma once

#include <chrono>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "borel_laplace.hpp"
#include "bounds.hpp"
#include "convolution.hpp"
#include "germ.hpp"
#include "known_series.hpp"
#include "nonlinear.hpp"
#include "report.hpp"

namespace resurgence::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool checks_pass = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::string summary;
  Report report;

  bool within_time() const { return seconds <= limit_seconds; }
  bool pass() const { return checks_pass && within_time(); }
  /// Timings are left out so that identical runs give identical JSON.
  json to_json() const {
    return {{"id", id}, {"name", name}, {"pass", checks_pass}, {"limit_seconds", limit_seconds},
            {"summary", summary}, {"report", report.to_json()}};
  }
  std::string line() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fs/%.0fs", seconds, limit_seconds);
    return std::string(pass() ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " " + name + " (" + buf +
           (within_time() ? "" : ", over time limit") + "): " + summary;
  }
};

struct Options {
  int jobs = 1;
  unsigned seed = 1;
};

namespace detail {

inline const double kPi = std::numbers::pi;

inline OmegaSet nonnegative_integers(double radius = 4.0) { return OmegaSet({cplx(1.0, 0.0)}, radius); }
inline OmegaSet integer_window(double radius = 6.0) { return OmegaSet({cplx(1.0, 0.0), cplx(-1.0, 0.0)}, radius); }

/// 0 -> 0.5, then a positive polygonal loop of radius 0.5 around 1, back to 0.5.
inline SurfacePath loop_around_one(int sides = 48, double r = 0.5) {
  std::vector<cplx> v{cplx(0, 0), cplx(1.0 - r, 0)};
  for (int k = 1; k <= sides; ++k) v.push_back(1.0 - r * std::polar(1.0, 2.0 * kPi * k / sides));
  return SurfacePath(v);
}

/// Homotopic to loop_around_one: an axis-parallel rectangle around 1.
inline SurfacePath box_loop_around_one() {
  return SurfacePath({{0, 0}, {0.5, 0}, {0.5, -0.6}, {1.6, -0.6}, {1.6, 0.7}, {0.5, 0.7}, {0.5, 0}});
}

inline cplx dilog_series(cplx x) {
  cplx acc = 0.0, p = x;
  for (int k = 1; k < 400; ++k, p *= x) acc += p / double(k * k);
  return acc;
}

/// 1 * g * g for g = 1/(1 - zeta), continued once around 1 in the positive sense, at z near 0.5.
inline cplx two_fold_loop_oracle(cplx z) {
  const cplx lg = std::log(1.0 - z) + cplx(0.0, 2.0 * kPi);
  return 2.0 * (lg * std::log(2.0 - z) + dilog_series(z - 1.0) + kPi * kPi / 12.0);
}

inline cplx one_fold_loop_oracle() { return -std::log(0.5) - cplx(0.0, 2.0 * kPi); }

inline Rational rat(long n, long d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline ExactSeries random_exact_series(std::mt19937& rng, int order, bool constant) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  ExactSeries s(order);
  auto draw = [&] {
    const int a = num(rng), b = den(rng), c = num(rng), d = den(rng);
    return ExactComplex(rat(a, b), rat(c, d));
  };
  if (constant) s.constant() = draw();
  for (int n = 0; n <= order; ++n) s.coeff(n) = draw();
  return s;
}

inline Check boolean_check(std::string name, bool ok, std::string note = {}) {
  Check c = Check::leq(std::move(name), ok ? 0.0 : 1.0, 0.0, std::move(note));
  return c;
}

}  // namespace detail

inline Report criterion_homomorphism() {
  Report r;
  r.title = "Borel transform of a product equals the convolution of Borel transforms";
  const auto e = euler_series<ExactComplex>(12);
  const auto lhs = borel(cauchy_product(e, e));
  const auto rhs = formal_convolution(borel(e), borel(e));
  std::size_t mismatches = 0;
  for (int n = 0; n <= 12; ++n)
    if (!(lhs.coeffs[n] == rhs.coeffs[n])) ++mismatches;
  Check c = detail::boolean_check("exact_coefficient_equality", lhs == rhs, "euler x euler, order 12");
  c.samples = 13;
  c.violations = mismatches;
  r.add(c);
  return r;
}

inline Report criterion_principal_oracle(unsigned seed) {
  Report r;
  r.title = "principal-sheet convolution of two geometric germs";
  auto geo = make_geometric_germ();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CheckAccumulator acc("abs_error_vs_closed_form", "-2 log(1 - zeta)/(2 - zeta) at 20 points of the disc of radius 0.8");
  for (int k = 0; k < 20; ++k) {
    const cplx z = std::polar(0.8 * std::sqrt(u(rng)), 2.0 * detail::kPi * u(rng));
    const cplx oracle = -2.0 * std::log(1.0 - z) / (2.0 - z);
    acc.add(std::abs(principal_convolution({geo, geo}, z, 1e-11).value - oracle), 1e-8);
  }
  r.add(acc);
  return r;
}

inline ContinuationOptions monodromy_options(int jobs, double tol) {
  ContinuationOptions opt;
  opt.level = 3;
  opt.tol = tol;
  opt.jobs = jobs;
  return opt;
}

inline Report criterion_monodromy(int jobs) {
  Report r;
  r.title = "continuation of unit-prepended convolutions around 1";
  const OmegaSet om = detail::nonnegative_integers();
  auto geo = make_geometric_germ();
  const auto r1 = continued_convolution({geo}, detail::loop_around_one(), om, monodromy_options(jobs, 1e-6));
  r.add(Check::leq("n1_abs_error", std::abs(r1.value - detail::one_fold_loop_oracle()), 1e-6, "-log 0.5 - 2 pi i"));
  const auto r2 = continued_convolution({geo, geo}, detail::loop_around_one(), om, monodromy_options(jobs, 1e-5));
  r.add(Check::leq("n2_abs_error", std::abs(r2.value - detail::two_fold_loop_oracle(0.5)), 1e-5,
                   "branch-tracked closed form"));
  r.extra = {{"n1_value", resurgence::detail::complex_to_json(r1.value)}, {"n1_error_estimate", r1.error_estimate},
             {"n2_value", resurgence::detail::complex_to_json(r2.value)}, {"n2_error_estimate", r2.error_estimate},
             {"n2_oracle", resurgence::detail::complex_to_json(detail::two_fold_loop_oracle(0.5))}};
  return r;
}

/// Nodes covering the zero faces, the top face and the interior of the simplex.
inline std::vector<std::vector<double>> flow_test_nodes(std::size_t n, unsigned seed) {
  std::vector<std::vector<double>> out;
  out.push_back(std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    out.push_back(e);
  }
  out.push_back(std::vector<double>(n, 1.0 / double(n)));
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> s(n);
    double tot = 0.0;
    for (auto& v : s) tot += (v = u(rng));
    const double scale = (k % 2 == 0 ? 1.0 : 0.8) / tot;
    for (auto& v : s) v *= scale;
    // Put one component on a zero face.
    if (n > 1 && k >= 2) s[k % n] = 0.0;
    out.push_back(s);
  }
  return out;
}

inline Report criterion_flow_invariants(unsigned seed) {
  Report r;
  r.title = "flow invariants";
  const OmegaSet om = detail::nonnegative_integers();
  const std::vector<std::pair<std::string, SurfacePath>> paths{{"polygon_loop", detail::loop_around_one(24)},
                                                               {"box_loop", detail::box_loop_around_one()}};
  FlowOptions fo;
  fo.record = true;
  fo.jacobian = true;
  FlowCheckOptions fco;
  fco.step_tol = fo.step_tol;
  fco.seed = seed;
  json runs = json::array();
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& [pname, path] : paths) {
      const auto ip = prepare_isotopy_path(path, om);
      std::vector<FlowNode> nodes;
      for (const auto& s : flow_test_nodes(n, seed + unsigned(n))) nodes.push_back(integrate_isotopy(ip, om, s, nullptr, fo));
      Report sub = check_flow_estimates(ip, om, nodes, fco);
      for (auto& c : sub.checks) c.name = "n" + std::to_string(n) + "_" + pname + "_" + c.name;
      r.append(sub);
      runs.push_back({{"n", n}, {"path", pname}, {"nodes", nodes.size()}, {"delta", ip.delta}, {"L", ip.tail_length()}});
    }
  r.extra["runs"] = runs;
  return r;
}

inline Report criterion_convolution_bounds(unsigned seed) {
  Report r;
  r.title = "convolution bounds on K_{0.3,1.5} for the integer window";
  const OmegaSet om = detail::integer_window();
  const std::vector<GermPtr> pool{make_one_germ(), make_euler_germ(), make_geometric_germ()};
  BoundOptions opt;
  opt.witnesses = 60;
  opt.seed = seed;
  std::size_t total_witnesses = 0, violations = 0;
  json cases = json::array();
  CheckAccumulator one_prime("unit_prepended_bound_worst_case"), one("convolution_bound_worst_case");
  for (std::size_t n = 1; n <= 4; ++n)
    for (const auto& germs : germ_multisets(pool, n)) {
      const Report a = check_unit_prepended_bound(germs, om, opt);
      const Report b = check_convolution_bound(germs, om, opt);
      for (const auto& c : a.checks) {
        one_prime.add(c.lhs, c.rhs);
        total_witnesses += c.samples;
        violations += c.violations;
      }
      for (const auto& c : b.checks) {
        one.add(c.lhs, c.rhs);
        total_witnesses += c.samples;
        violations += c.violations;
      }
      cases.push_back({{"germs", a.extra["germs"]},
                       {"unit_prepended", a.checks[0].to_json()},
                       {"plain", b.checks[0].to_json()}});
    }
  Check cv = Check::leq("total_violations", double(violations), 0.0);
  cv.samples = total_witnesses;
  cv.violations = violations;
  r.add(cv);
  r.add(one_prime);
  r.add(one);
  r.add(Check::leq("witness_count_at_least_50", 50.0, double(opt.witnesses)));
  r.extra = {{"cases", cases}, {"witnesses_evaluated", total_witnesses}};
  return r;
}

inline Report criterion_group_laws(unsigned seed) {
  Report r;
  r.title = "composition and inversion of rational diffeomorphisms, order 16";
  const int N = 16;
  std::mt19937 rng(seed);
  const auto id = FormalDiffeo<ExactComplex>::identity(N);
  std::size_t left = 0, right = 0, assoc = 0;
  for (int t = 0; t < 10; ++t) {
    const FormalDiffeo<ExactComplex> f{detail::random_exact_series(rng, N, true)};
    const auto h = invert(f);
    if (!(compose(h, f) == id)) ++left;
    if (!(compose(f, h) == id)) ++right;
  }
  for (int t = 0; t < 10; ++t) {
    const FormalDiffeo<ExactComplex> a{detail::random_exact_series(rng, N, true)};
    const FormalDiffeo<ExactComplex> b{detail::random_exact_series(rng, N, true)};
    const FormalDiffeo<ExactComplex> c{detail::random_exact_series(rng, N, true)};
    if (!(compose(compose(a, b), c) == compose(a, compose(b, c)))) ++assoc;
  }
  auto counted = [](std::string name, std::size_t bad, std::size_t samples) {
    Check c = Check::leq(std::move(name), double(bad), 0.0);
    c.samples = samples;
    c.violations = bad;
    return c;
  };
  r.add(counted("inverse_then_f_is_identity", left, 10));
  r.add(counted("f_then_inverse_is_identity", right, 10));
  r.add(counted("associativity", assoc, 10));
  return r;
}

inline Report criterion_catalan() {
  Report r;
  r.title = "implicit function with Catalan solution";
  const int N = 10;
  ConvergentFamily<ExactComplex> F(1, required_depth(N), N);
  F.set({0}, ExactSeries::monomial(0, N));
  F.set({1}, ExactSeries::constant_series(ExactComplex(Rational(-1)), N));
  F.set({2}, ExactSeries::constant_series(ExactComplex(Rational(1)), N));
  const ExactSeries phi = implicit_solve(F, N);
  const long catalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862};
  std::size_t bad = 0;
  json coeffs = json::array();
  for (int n = 0; n < 10; ++n) {
    if (!(phi.coeff(n) == ExactComplex(Rational(catalan[n])))) ++bad;
    coeffs.push_back(phi.coeff(n).re.get_str());
  }
  Check c = Check::leq("catalan_coefficients_exact", double(bad), 0.0);
  c.samples = 10;
  c.violations = bad;
  r.add(c);
  // F(z, phi) = 1/z - phi + phi^2.
  ExactSeries res = ExactSeries::monomial(0, N) - phi + cauchy_product(phi, phi);
  std::size_t nonzero = res.constant() == ExactComplex() ? 0 : 1;
  for (int n = 0; n <= N; ++n)
    if (!(res.coeff(n) == ExactComplex())) ++nonzero;
  Check z = Check::leq("residual_vanishes_exactly", double(nonzero), 0.0, "through order 10");
  z.samples = std::size_t(N) + 2;
  z.violations = nonzero;
  r.add(z);
  r.extra["coefficients"] = coeffs;
  return r;
}

inline Report criterion_laplace_oracles() {
  Report r;
  r.title = "Borel-Laplace sums against closed forms";
  const DirectionInterval narrow{-0.1, 0.1, 0.5, 0.0};
  const auto e = registered_summable("euler", narrow);
  const auto st = registered_summable("stirling", narrow);
  CheckAccumulator ea("euler_vs_exp_E1", "z in {1, 2, 5}"), sa("stirling_vs_log_gamma", "z in {2, 4, 8}");
  json vals = json::object();
  for (double z : {1.0, 2.0, 5.0}) {
    const double oracle = std::exp(z) * boost::math::expint(1, z);
    const cplx v = laplace_sum(e, z, 0.0, 1e-10).value;
    ea.add(std::abs(v - oracle), 1e-7);
    vals["euler"].push_back({z, v.real(), oracle});
  }
  for (double z : {2.0, 4.0, 8.0}) {
    const double oracle = std::lgamma(z) - (z - 0.5) * std::log(z) + z - 0.5 * std::log(2.0 * detail::kPi);
    const cplx v = laplace_sum(st, z, 0.0, 1e-10).value;
    sa.add(std::abs(v - oracle), 1e-7);
    vals["stirling"].push_back({z, v.real(), oracle});
  }
  r.add(ea);
  r.add(sa);
  const auto ew = registered_summable("euler", DirectionInterval{-0.35, 0.35, 0.5, 0.0});
  const auto di1 = direction_independence_check(ew, 2.0, -0.2, 0.2, 1e-10);
  r.add(Check::leq("euler_direction_independence", di1.checks[0].lhs, 1e-7, "z = 2, theta = -0.2 and 0.2"));
  const auto sw = registered_summable("stirling", DirectionInterval{-0.1, 0.35, 0.5, 0.0});
  const auto di2 = direction_independence_check(sw, cplx(3.0, 1.0), 0.0, 0.3, 1e-10);
  r.add(Check::leq("stirling_direction_independence", di2.checks[0].lhs, 1e-7, "z = 3 + i, theta = 0 and 0.3"));
  const auto ge = gevrey_asymptotic_check(e, {6.0, 8.0, 10.0, 12.0, 16.0}, 5);
  const auto gs = gevrey_asymptotic_check(st, {8.0, 10.0, 14.0}, 4);
  for (auto c : ge.checks) {
    c.name = "euler_" + c.name;
    r.add(c);
  }
  for (auto c : gs.checks) {
    c.name = "stirling_" + c.name;
    r.add(c);
  }
  vals["gevrey_euler"] = ge.extra;
  vals["gevrey_stirling"] = gs.extra;
  r.extra = vals;
  return r;
}

inline Report criterion_functional_identities() {
  Report r;
  r.title = "sums of products and of composed diffeomorphisms";
  const DirectionInterval narrow{-0.1, 0.1, 0.5, 0.0};
  const auto e = registered_summable("euler", narrow, 20, 60);
  const auto st = registered_summable("stirling", narrow);
  SummableOpsOptions po;
  po.default_points = 10;
  po.identity_tol = 1e-6;
  const Report prod = summable_ops_check(SummableOp::Product, {e, st}, po);
  for (auto c : prod.checks) {
    c.name = "product_" + c.name;
    r.add(c);
  }
  SummableOpsOptions co;
  co.default_points = 5;
  co.identity_tol = 1e-5;
  const Report comp = summable_ops_check(SummableOp::Compose, {e, e}, co);
  for (auto c : comp.checks) {
    c.name = "compose_" + c.name;
    r.add(c);
  }
  r.extra = {{"product", prod.extra}, {"compose", comp.extra}};
  return r;
}

inline Report criterion_deformation_independence(int jobs) {
  Report r;
  r.title = "homotopic continuation paths give the same value";
  const OmegaSet om = detail::nonnegative_integers();
  auto geo = make_geometric_germ();
  json extra = json::object();
  for (std::size_t n : {1u, 2u}) {
    const double tol = n == 1 ? 1e-6 : 1e-5;
    const std::vector<GermPtr> germs(n, geo);
    const auto a = continued_convolution(germs, detail::loop_around_one(), om, monodromy_options(jobs, tol));
    const auto b = continued_convolution(germs, detail::box_loop_around_one(), om, monodromy_options(jobs, tol));
    r.add(Check::leq("n" + std::to_string(n) + "_path_difference", std::abs(a.value - b.value), 2.0 * (tol + tol),
                     "twice the combined tolerance"));
    extra["n" + std::to_string(n)] = {{"polygon", resurgence::detail::complex_to_json(a.value)}, {"box", resurgence::detail::complex_to_json(b.value)}};
  }
  r.extra = extra;
  return r;
}

struct CriterionSpec {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Report(const Options&)> run;
};

inline std::vector<CriterionSpec> criteria() {
  return {
      {1, "borel_homomorphism", 1.0, [](const Options&) { return criterion_homomorphism(); }},
      {2, "principal_convolution_oracle", 10.0, [](const Options& o) { return criterion_principal_oracle(o.seed); }},
      {3, "monodromy_by_flow", 120.0, [](const Options& o) { return criterion_monodromy(o.jobs); }},
      {4, "flow_invariants", 300.0, [](const Options& o) { return criterion_flow_invariants(o.seed); }},
      {5, "convolution_bounds", 600.0, [](const Options& o) { return criterion_convolution_bounds(o.seed); }},
      {6, "diffeo_group_laws", 30.0, [](const Options& o) { return criterion_group_laws(o.seed); }},
      {7, "implicit_catalan", 5.0, [](const Options&) { return criterion_catalan(); }},
      {8, "laplace_oracles", 60.0, [](const Options&) { return criterion_laplace_oracles(); }},
      {9, "summation_identities", 120.0, [](const Options&) { return criterion_functional_identities(); }},
      {10, "deformation_independence", 120.0, [](const Options& o) { return criterion_deformation_independence(o.jobs); }},
  };
}

inline std::string summarize(const Report& r) {
  std::size_t fails = 0;
  std::string worst;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& c : r.checks) {
    if (!c.pass) ++fails;
    if (c.margin() < worst_margin) {
      worst_margin = c.margin();
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s lhs=%.3g rhs=%.3g", c.name.c_str(), c.lhs, c.rhs);
      worst = buf;
    }
  }
  return std::to_string(r.checks.size() - fails) + "/" + std::to_string(r.checks.size()) + " checks pass" +
         (worst.empty() ? "" : "; tightest: " + worst);
}

/// Runs the selected criteria (all when `only` is empty). Each result line goes to `log` as soon
/// as it is available. Errors raised inside a criterion make it fail with the error message.
inline std::vector<CriterionResult> run(const std::set<int>& only, const Options& opt, std::ostream* log = nullptr) {
  std::vector<CriterionResult> out;
  for (const auto& spec : criteria()) {
    if (!only.empty() && !only.count(spec.id)) continue;
    CriterionResult res;
    res.id = spec.id;
    res.name = spec.name;
    res.limit_seconds = spec.limit_seconds;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      res.report = spec.run(opt);
      res.checks_pass = res.report.all_pass() && !res.report.checks.empty();
      res.summary = summarize(res.report);
    } catch (const std::exception& e) {
      res.checks_pass = false;
      res.summary = std::string("error: ") + e.what();
      res.report.title = spec.name;
      res.report.extra["error"] = e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << res.line() << std::endl;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace resurgence::acceptance
