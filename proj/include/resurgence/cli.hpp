#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "borel_laplace.hpp"
#include "bounds.hpp"
#include "convolution.hpp"
#include "germ.hpp"
#include "nonlinear.hpp"
#include "omega.hpp"
#include "report.hpp"
#include "series_json.hpp"

namespace resurgence::cli {

/// Everything a run depends on. Identical configs give identical output.
struct RunConfig {
  std::string verb;
  std::string omega_file;
  std::string path_file;
  std::vector<std::string> germs;
  std::vector<std::string> series_files;
  int order = 20;
  std::optional<double> tol;
  int grid = 3;
  std::optional<double> step;
  std::optional<double> theta;
  std::optional<std::string> z;
  int jobs = 1;
  unsigned seed = 1;
  std::string out_file;
  std::string only;
  double delta = 0.3;
  double length = 1.5;
  std::size_t witnesses = 60;
};

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{"borel",  "convolve", "continue", "sum",       "bounds",
                                          "compose", "invert",  "implicit", "substitute", "selftest"};
  return v;
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Shortest round-trip numbers plus fixed 17-digit strings for audits.
inline json complex_out(cplx z) {
  return {{"re", z.real()}, {"im", z.imag()}, {"re_17g", format17(z.real())}, {"im_17g", format17(z.imag())}};
}

inline cplx parse_complex(const std::string& s) {
  const auto parts = split_list(s);
  try {
    if (parts.size() == 1) return {std::stod(parts[0]), 0.0};
    if (parts.size() == 2) return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
  }
  fail(ErrorCode::ParseError, "complex argument must be \"re,im\", got '" + s + "'");
}

inline std::vector<GermPtr> germs_of(const RunConfig& c, std::size_t min_count = 1) {
  if (c.germs.size() < min_count) fail(ErrorCode::ParseError, "--germs needs at least " + std::to_string(min_count) + " name(s)");
  std::vector<GermPtr> g;
  for (const auto& name : c.germs) g.push_back(make_germ(name));
  return g;
}

inline OmegaSet omega_of(const RunConfig& c, const OmegaSet& fallback) {
  if (c.omega_file.empty()) return fallback;
  return OmegaSet::from_json(read_json_file(c.omega_file));
}

inline OmegaSet default_omega() { return OmegaSet({cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 6.0); }

inline SurfacePath path_of(const RunConfig& c) {
  if (c.path_file.empty()) fail(ErrorCode::ParseError, "--path is required");
  return SurfacePath::from_csv_file(c.path_file);
}

inline cplx z_of(const RunConfig& c) {
  if (!c.z) fail(ErrorCode::ParseError, "--z is required");
  return parse_complex(*c.z);
}

inline std::vector<AnySeries> series_of(const RunConfig& c, std::size_t min_count) {
  if (c.series_files.size() < min_count)
    fail(ErrorCode::ParseError, "--series needs at least " + std::to_string(min_count) + " file(s)");
  std::vector<AnySeries> out;
  for (const auto& f : c.series_files) out.push_back(series_from_json(read_json_file(f)));
  return out;
}

inline bool all_exact(const std::vector<AnySeries>& s) {
  for (const auto& a : s)
    if (!std::holds_alternative<ExactSeries>(a)) return false;
  return true;
}

template <SeriesScalar S>
TruncatedSeries<S> as(const AnySeries& a) {
  if constexpr (is_exact_v<S>) {
    if (auto p = std::get_if<ExactSeries>(&a)) return *p;
    return to_exact(std::get<FloatSeries>(a));
  } else {
    if (auto p = std::get_if<FloatSeries>(&a)) return *p;
    return to_float(std::get<ExactSeries>(a));
  }
}

/// A family file is exact when every term series declares exact mode.
inline bool family_is_exact(const json& j) {
  if (!j.contains("terms") || !j["terms"].is_array()) fail(ErrorCode::ParseError, "family JSON needs a 'terms' array");
  for (const auto& t : j["terms"])
    if (!t.contains("series") || t["series"].value("mode", std::string("float")) != "exact") return false;
  return true;
}

struct Outcome {
  json result = json::object();
  std::vector<Report> reports;
  bool pass() const {
    for (const auto& r : reports)
      if (!r.all_pass()) return false;
    return true;
  }
};

inline Outcome run_borel(const RunConfig& c) {
  Outcome o;
  std::vector<AnySeries> in;
  if (!c.series_files.empty()) {
    in = series_of(c, 1);
  } else {
    for (const auto& g : c.germs) {
      if (g == "euler") in.push_back(euler_series<ExactComplex>(c.order));
      else if (g == "stirling") in.push_back(stirling_series<ExactComplex>(c.order));
      else if (g == "geometric") in.push_back(geometric_series<ExactComplex>(c.order));
      else if (g == "one") in.push_back(ExactSeries::monomial(0, c.order));
      else in.push_back(registered_series(g, c.order));
    }
    if (in.empty()) fail(ErrorCode::ParseError, "borel needs --series or --germs");
  }
  Report rep;
  rep.title = "borel transform";
  json items = json::array();
  auto handle = [&]<SeriesScalar S>(const TruncatedSeries<S>& s) {
    const auto b = borel(s);
    json coeffs = json::array();
    for (const auto& v : b.coeffs) coeffs.push_back(complex_out(ScalarTraits<S>::to_cplx(v)));
    json item{{"series", series_to_json(s)}, {"borel", coeffs}};
    if constexpr (is_exact_v<S>) {
      json ex = json::array();
      for (const auto& v : b.coeffs) ex.push_back(resurgence::detail::exact_to_json(v));
      item["borel_exact"] = ex;
      rep.add(acceptance::detail::boolean_check("inverse_borel_round_trip", inverse_borel(b, s.constant()) == s));
    } else {
      const auto back = inverse_borel(b, s.constant());
      double d = 0.0;
      for (int n = 0; n <= s.order(); ++n) d = std::max(d, std::abs(back.coeff(n) - s.coeff(n)) / (1.0 + std::abs(s.coeff(n))));
      rep.add(Check::leq("inverse_borel_round_trip", d, 1e-12));
    }
    items.push_back(item);
  };
  for (const auto& a : in) std::visit([&](const auto& s) { handle(s); }, a);
  if (in.size() == 2) {
    if (all_exact(in)) {
      const auto &s1 = std::get<ExactSeries>(in[0]), &s2 = std::get<ExactSeries>(in[1]);
      rep.add(acceptance::detail::boolean_check("product_homomorphism_exact",
                                                borel(cauchy_product(s1, s2)) == formal_convolution(borel(s1), borel(s2))));
    } else {
      const auto s1 = as<cplx>(in[0]), s2 = as<cplx>(in[1]);
      const auto l = borel(cauchy_product(s1, s2)), r = formal_convolution(borel(s1), borel(s2));
      double d = 0.0;
      for (std::size_t n = 0; n < l.coeffs.size(); ++n) d = std::max(d, std::abs(l.coeffs[n] - r.coeffs[n]) / (1.0 + std::abs(r.coeffs[n])));
      rep.add(Check::leq("product_homomorphism", d, 1e-12));
    }
  }
  o.result["items"] = items;
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_convolve(const RunConfig& c) {
  Outcome o;
  const auto germs = germs_of(c);
  const cplx z = z_of(c);
  const double tol = c.tol.value_or(1e-10);
  std::optional<OmegaSet> om;
  if (!c.omega_file.empty()) om = omega_of(c, default_omega());
  const auto v = principal_convolution(germs, z, tol, om ? &*om : nullptr);
  o.result = {{"value", complex_out(v.value)}, {"error_estimate", v.error_estimate}, {"points_per_axis", v.points_per_axis},
              {"z", complex_out(z)}, {"tol", tol}};
  Report rep;
  rep.title = "principal convolution";
  rep.add(Check::leq("error_estimate_within_tol", v.error_estimate, tol));
  o.reports.push_back(rep);
  return o;
}

inline ContinuationOptions continuation_options(const RunConfig& c) {
  ContinuationOptions opt;
  opt.level = c.grid;
  opt.tol = c.tol.value_or(1e-6);
  opt.jobs = c.jobs;
  if (c.step) opt.flow.step_tol = *c.step;
  opt.enforce_tolerance = false;
  return opt;
}

inline Outcome run_continue(const RunConfig& c) {
  Outcome o;
  const auto germs = germs_of(c);
  const auto path = path_of(c);
  const OmegaSet om = omega_of(c, default_omega());
  const auto opt = continuation_options(c);
  const auto r = continued_convolution(germs, path, om, opt);
  const auto sd = sheet_data(path, om);
  json windings = json::array();
  const auto pts = om.points();
  for (std::size_t k = 0; k < sd.winding.size() && k < pts.size(); ++k)
    if (sd.winding[k] != 0) windings.push_back({{"point", complex_out(pts[k])}, {"winding", sd.winding[k]}});
  o.result = {{"value", complex_out(r.value)},
              {"coarse_value", complex_out(r.coarse_value)},
              {"error_estimate", r.error_estimate},
              {"tol", opt.tol},
              {"grid", opt.level},
              {"pieces", r.pieces},
              {"flow_nodes", r.flow_nodes},
              {"endpoint", complex_out(path.endpoint())},
              {"principal_sheet", sd.principal},
              {"windings", windings},
              {"delta", r.path.delta},
              {"tail_length", r.path.tail_length()}};
  Report rep;
  rep.title = "continued unit-prepended convolution";
  rep.add(Check::leq("error_estimate_within_tol", r.error_estimate, opt.tol));
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_sum(const RunConfig& c) {
  Outcome o;
  if (c.germs.size() != 1) fail(ErrorCode::ParseError, "sum needs exactly one --germ");
  const cplx z = z_of(c);
  const double theta = c.theta.value_or(0.0);
  const double tol = c.tol.value_or(1e-10);
  const DirectionInterval A{theta - 0.1, theta + 0.1, 0.5, 0.0};
  const auto s = registered_summable(c.germs[0], A, c.order);
  const auto v = laplace_sum(s, z, theta, tol);
  o.result = {{"germ", c.germs[0]},         {"z", complex_out(z)},          {"theta", v.theta},
              {"value", complex_out(v.value)}, {"error_estimate", v.error_estimate}, {"radius", v.radius},
              {"tail_bound", v.tail_bound}, {"tol", tol},
              {"certificate", {{"C", s.certificate->C}, {"tau", s.certificate->tau}, {"radius", s.certificate->radius}}}};
  Report rep;
  rep.title = "directional Laplace sum";
  rep.add(Check::leq("error_estimate_within_tol", v.error_estimate, tol));
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_bounds(const RunConfig& c) {
  Outcome o;
  const auto germs = germs_of(c);
  const OmegaSet om = omega_of(c, default_omega());
  BoundOptions opt;
  opt.delta = c.delta;
  opt.L = c.length;
  opt.witnesses = c.witnesses;
  opt.seed = c.seed;
  if (c.tol) opt.tol = *c.tol;
  opt.continuation.level = c.grid;
  opt.continuation.jobs = c.jobs;
  o.reports.push_back(check_unit_prepended_bound(germs, om, opt));
  o.reports.push_back(check_convolution_bound(germs, om, opt));
  if (!c.path_file.empty()) {
    const auto ip = prepare_isotopy_path(path_of(c), om);
    FlowOptions fo;
    fo.record = true;
    fo.jacobian = true;
    if (c.step) fo.step_tol = *c.step;
    FlowCheckOptions fco;
    fco.step_tol = fo.step_tol;
    fco.seed = c.seed;
    std::vector<FlowNode> nodes;
    for (const auto& s : acceptance::flow_test_nodes(germs.size(), c.seed))
      nodes.push_back(integrate_isotopy(ip, om, s, nullptr, fo));
    o.reports.push_back(check_flow_estimates(ip, om, nodes, fco));
  }
  return o;
}

template <SeriesScalar S>
bool is_identity(const FormalDiffeo<S>& f, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return f == FormalDiffeo<S>::identity(f.order());
  } else {
    if (std::abs(f.phi.constant()) > tol) return false;
    for (int n = 0; n <= f.order(); ++n)
      if (std::abs(f.phi.coeff(n)) > tol) return false;
    return true;
  }
}

inline Outcome run_compose(const RunConfig& c) {
  Outcome o;
  const auto in = series_of(c, 2);
  Report rep;
  rep.title = "composition";
  auto go = [&]<SeriesScalar S>() {
    FormalDiffeo<S> acc{as<S>(in.back())};
    for (std::size_t k = in.size() - 1; k-- > 0;) acc = compose(FormalDiffeo<S>{as<S>(in[k])}, acc);
    o.result["composed"] = series_to_json(acc.phi);
  };
  if (all_exact(in)) go.template operator()<ExactComplex>();
  else go.template operator()<cplx>();
  o.result["note"] = "first file applied last: f1 o f2 o ... o fk";
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_invert(const RunConfig& c) {
  Outcome o;
  const auto in = series_of(c, 1);
  Report rep;
  rep.title = "inversion";
  const double tol = c.tol.value_or(1e-10);
  auto go = [&]<SeriesScalar S>() {
    const FormalDiffeo<S> f{as<S>(in[0])};
    const auto h = invert(f);
    o.result["inverse"] = series_to_json(h.phi);
    rep.add(acceptance::detail::boolean_check("f_after_inverse_is_identity", is_identity(compose(f, h), tol)));
    rep.add(acceptance::detail::boolean_check("inverse_after_f_is_identity", is_identity(compose(h, f), tol)));
  };
  if (all_exact(in)) go.template operator()<ExactComplex>();
  else go.template operator()<cplx>();
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_implicit(const RunConfig& c) {
  Outcome o;
  if (c.series_files.size() != 1) fail(ErrorCode::ParseError, "implicit needs one --series family file");
  const json j = read_json_file(c.series_files[0]);
  auto go = [&]<SeriesScalar S>() {
    const auto F = ConvergentFamily<S>::from_json(j);
    const int order = std::min(c.order, F.order());
    o.result["solution"] = series_to_json(implicit_solve(F, order));
    o.result["order"] = order;
  };
  if (family_is_exact(j)) go.template operator()<ExactComplex>();
  else go.template operator()<cplx>();
  Report rep;
  rep.title = "implicit function";
  rep.add(acceptance::detail::boolean_check("residual_check", true, "verified inside the solver"));
  o.reports.push_back(rep);
  return o;
}

inline Outcome run_substitute(const RunConfig& c) {
  Outcome o;
  if (c.series_files.size() < 2) fail(ErrorCode::ParseError, "substitute needs a family file followed by argument series");
  const json j = read_json_file(c.series_files[0]);
  std::vector<AnySeries> args;
  for (std::size_t k = 1; k < c.series_files.size(); ++k) args.push_back(series_from_json(read_json_file(c.series_files[k])));
  auto go = [&]<SeriesScalar S>() {
    const auto H = ConvergentFamily<S>::from_json(j);
    std::vector<TruncatedSeries<S>> a;
    for (const auto& x : args) a.push_back(as<S>(x));
    o.result["substituted"] = series_to_json(substitute(H, a));
  };
  if (family_is_exact(j) && all_exact(args)) go.template operator()<ExactComplex>();
  else go.template operator()<cplx>();
  o.reports.push_back(Report{"substitution", {}, {}});
  return o;
}

inline Outcome run_selftest(const RunConfig& c, std::ostream& log) {
  Outcome o;
  std::set<int> only;
  for (const auto& s : split_list(c.only)) {
    try {
      only.insert(std::stoi(s));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "--only takes criterion numbers, got '" + s + "'");
    }
  }
  acceptance::Options opt;
  opt.jobs = c.jobs;
  opt.seed = c.seed;
  const auto results = acceptance::run(only, opt, &log);
  json arr = json::array();
  Report timing;
  timing.title = "runtime limits";
  for (const auto& r : results) {
    arr.push_back(r.to_json());
    o.reports.push_back(r.report);
    if (!r.checks_pass && r.report.checks.empty())
      o.reports.back().add(acceptance::detail::boolean_check("criterion_ran", false, r.summary));
    timing.add(acceptance::detail::boolean_check("criterion_" + std::to_string(r.id) + "_within_limit", r.within_time()));
  }
  o.reports.push_back(timing);
  o.result["criteria"] = arr;
  return o;
}

}  // namespace detail

/// Parses argv into a RunConfig. Returns nullopt when help was requested (text goes to `out`).
inline std::optional<RunConfig> parse(int argc, const char* const* argv, std::ostream& out) {
  RunConfig c;
  CLI::App app{"resurgent series toolkit"};
  app.add_option("verb", c.verb, "borel | convolve | continue | sum | bounds | compose | invert | implicit | substitute | selftest")
      ->required()
      ->check(CLI::IsMember(verbs()));
  std::string germs;
  app.add_option("--germs,--germ", germs, "comma-separated germ names");
  app.add_option("--omega", c.omega_file, "Omega JSON file");
  app.add_option("--path", c.path_file, "path CSV file (re,im per line)");
  app.add_option("--series", c.series_files, "series or family JSON file(s); repeat or separate by commas")->delimiter(',');
  app.add_option("--order", c.order, "truncation order")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", c.tol, "absolute tolerance")->check(CLI::PositiveNumber);
  app.add_option("--grid", c.grid, "continuation grid level")->check(CLI::Range(1, 8));
  app.add_option("--step", c.step, "flow step tolerance")->check(CLI::PositiveNumber);
  app.add_option("--theta", c.theta, "Laplace direction in radians");
  app.add_option("--z", c.z, "complex point \"re,im\"");
  app.add_option("--jobs", c.jobs, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "sampling seed");
  app.add_option("--out", c.out_file, "also write the JSON output to this file");
  app.add_option("--only", c.only, "selftest: comma-separated criterion numbers");
  app.add_option("--delta", c.delta, "bounds: delta")->check(CLI::PositiveNumber);
  app.add_option("--length", c.length, "bounds: path length L")->check(CLI::PositiveNumber);
  app.add_option("--witnesses", c.witnesses, "bounds: witness count")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  c.germs = detail::split_list(germs);
  return c;
}

/// Output document of a verb; pass is true iff every check passed.
inline json run(const RunConfig& c, std::ostream& log = std::cerr) {
  detail::Outcome o;
  if (c.verb == "borel") o = detail::run_borel(c);
  else if (c.verb == "convolve") o = detail::run_convolve(c);
  else if (c.verb == "continue") o = detail::run_continue(c);
  else if (c.verb == "sum") o = detail::run_sum(c);
  else if (c.verb == "bounds") o = detail::run_bounds(c);
  else if (c.verb == "compose") o = detail::run_compose(c);
  else if (c.verb == "invert") o = detail::run_invert(c);
  else if (c.verb == "implicit") o = detail::run_implicit(c);
  else if (c.verb == "substitute") o = detail::run_substitute(c);
  else if (c.verb == "selftest") o = detail::run_selftest(c, log);
  else fail(ErrorCode::ParseError, "unknown verb '" + c.verb + "'");
  json reports = json::array();
  for (const auto& r : o.reports) reports.push_back(r.to_json());
  return {{"verb", c.verb}, {"pass", o.pass()}, {"result", o.result}, {"reports", reports}};
}

inline json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

/// Exit status: 0 when every check passes, 1 when a check fails, 2 on any error.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& log = std::cerr) {
  json doc;
  int status = 0;
  std::string out_file;
  try {
    const auto cfg = parse(argc, argv, out);
    if (!cfg) return 0;
    out_file = cfg->out_file;
    doc = run(*cfg, log);
    status = doc["pass"].get<bool>() ? 0 : 1;
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string code(to_string(e.code()));
    const std::string prefix = code + ": ";
    doc = error_json(code, what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    status = 2;
  } catch (const std::exception& e) {
    doc = error_json("InternalError", e.what());
    status = 2;
  }
  out << doc.dump(2) << "\n";
  if (!out_file.empty()) {
    try {
      write_json_file(out_file, doc);
    } catch (const Error& e) {
      out << error_json(std::string(to_string(e.code())), e.what()).dump(2) << "\n";
      return 2;
    }
  }
  return status;
}

}  // namespace resurgence::cli
