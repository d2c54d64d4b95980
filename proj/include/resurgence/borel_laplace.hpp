#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "convolution.hpp"
#include "germ.hpp"
#include "known_series.hpp"
#include "nonlinear.hpp"
#include "report.hpp"
#include "series.hpp"

namespace resurgence {

/// Interval of directions A, with the disc radius rho of S(rho, A) and an exponential type tau.
struct DirectionInterval {
  double theta_min = -0.1;
  double theta_max = 0.1;
  double rho = 0.5;
  double tau = 0.0;

  void validate() const {
    if (!(theta_min < theta_max)) fail(ErrorCode::DomainError, "direction interval must satisfy theta_min < theta_max");
    if (!(rho > 0.0)) fail(ErrorCode::DomainError, "direction interval needs rho > 0");
    if (!(theta_max - theta_min < std::numbers::pi))
      fail(ErrorCode::DomainError, "direction intervals of length >= pi are not supported (z would not be single-valued)");
  }
  bool contains(double theta) const { return theta >= theta_min && theta <= theta_max; }
  double center() const { return 0.5 * (theta_min + theta_max); }
  /// `count` evenly spaced directions including both ends.
  std::vector<double> directions(int count) const {
    std::vector<double> out;
    if (count <= 1) return {center()};
    for (int k = 0; k < count; ++k) out.push_back(theta_min + (theta_max - theta_min) * k / (count - 1));
    return out;
  }
  /// Direction in A maximizing Re(z e^{i theta}).
  double best_theta(cplx z) const { return std::clamp(-std::arg(z), theta_min, theta_max); }
  /// sup over A of Re(z e^{i theta}) - t.
  double gap(cplx z, double t) const {
    const double th = best_theta(z);
    return (z * std::polar(1.0, th)).real() - t;
  }
};

/// |phi_hat(zeta)| <= C e^{tau |zeta|} on the rays of A, measured by sampling and inflated.
struct ExpCertificate {
  double C = 0.0;
  double tau = 0.0;
  /// Largest radius that was sampled.
  double radius = 0.0;
  bool measured = true;
};

struct CertificateOptions {
  int directions = 9;
  int points = 400;
  double radius = 30.0;
  double inflation = 2.0;
};

/// Formal series c + B^{-1}(phi_hat) together with the Borel germ and its certificate.
struct SummableSeries {
  std::string name;
  /// Coefficients available in floating point.
  FloatSeries series;
  /// Borel image of the part without constant term; null means the zero germ.
  GermPtr germ;
  DirectionInterval A;
  std::optional<ExpCertificate> certificate;
  /// Exact coefficients to high order, when available.
  std::optional<ExactSeries> exact;
  /// When set, every singularity of the germ lies on (-inf, -slit_start].
  std::optional<double> slit_start;

  cplx constant() const { return series.constant(); }
};

namespace detail {

inline cplx germ_value(const GermPtr& g, cplx zeta) { return g ? g->eval_principal(zeta) : cplx(0.0); }

inline void check_sector(const Germ& g, const DirectionInterval& A, double radius) {
  if (!(g.origin_radius() > A.rho))
    fail(ErrorCode::DomainError, g.name() + ": the disc of radius rho meets a singularity");
  for (double th : A.directions(9))
    if (g.segment_clearance(0.0, std::polar(radius, th)) <= singular_touch_tolerance)
      fail(ErrorCode::DomainError, g.name() + ": a ray of the direction interval meets a singularity");
}

}  // namespace detail

inline ExpCertificate measure_certificate(const GermPtr& g, const DirectionInterval& A, double tau,
                                          const CertificateOptions& opt = {}) {
  A.validate();
  ExpCertificate c;
  c.tau = tau;
  c.radius = opt.radius;
  if (!g) return c;
  detail::check_sector(*g, A, opt.radius);
  double m = 0.0;
  for (double th : A.directions(opt.directions))
    for (int j = 0; j <= opt.points; ++j) {
      const double t = opt.radius * j / opt.points;
      m = std::max(m, std::abs(g->eval_principal(std::polar(t, th))) * std::exp(-tau * t));
    }
  c.C = opt.inflation * m;
  return c;
}

inline SummableSeries make_summable(std::string name, FloatSeries series, GermPtr germ, const DirectionInterval& A,
                                    const CertificateOptions& copt = {}) {
  A.validate();
  SummableSeries s{std::move(name), std::move(series), std::move(germ), A, std::nullopt, std::nullopt, std::nullopt};
  s.certificate = measure_certificate(s.germ, A, A.tau, copt);
  return s;
}

/// Registered series with its closed-form Borel germ. `exact_order` > 0 also stores exact coefficients.
inline SummableSeries registered_summable(const std::string& name, const DirectionInterval& A, int order = 20,
                                          int exact_order = 0, const CertificateOptions& copt = {}) {
  SummableSeries s = make_summable(name, registered_series(name, order), make_germ(name), A, copt);
  if (name == "euler" || name == "one") s.slit_start = 1.0;
  if (exact_order > 0) {
    if (name == "euler") s.exact = euler_series<ExactComplex>(exact_order);
    if (name == "stirling") s.exact = stirling_series<ExactComplex>(exact_order);
    if (name == "geometric") s.exact = geometric_series<ExactComplex>(exact_order);
    if (name == "one") s.exact = ExactSeries::monomial(0, exact_order);
  }
  return s;
}

/// c + 0: the zero germ.
inline SummableSeries constant_summable(cplx c, const DirectionInterval& A, int order = 10) {
  FloatSeries s(order);
  s.constant() = c;
  SummableSeries out{"constant", s, nullptr, A, ExpCertificate{0.0, A.tau, 0.0, true}, to_exact(s), 1.0};
  return out;
}

/// Germ analytic on C minus (-inf, -s0], represented through the map w = (sqrt(1+u)-1)/(sqrt(1+u)+1),
/// u = zeta/s0, which sends the slit plane onto the unit disc. The coefficients in w are obtained
/// exactly from the Borel coefficients via [w^m] (4w/(1-w)^2)^n = 4^n C(m+n-1, m-n).
class SlitPlaneGerm : public MeromorphicGerm {
 public:
  SlitPlaneGerm(std::string name, std::shared_ptr<const std::vector<cplx>> c, double s0)
      : MeromorphicGerm(
            std::move(name), [c, s0](cplx zeta) { return eval(*c, s0, zeta); },
            [s0](cplx z) { return z.real() <= -s0 ? std::abs(z.imag()) : std::abs(z + s0); }),
        c_(std::move(c)),
        s0_(s0) {}

  static std::shared_ptr<SlitPlaneGerm> from_borel(std::string name, const BorelSeries<ExactComplex>& b,
                                                   const Rational& s0) {
    const int M = static_cast<int>(b.coeffs.size()) - 1;
    std::vector<ExactComplex> beta(M + 1);
    Rational p = 1;
    for (int n = 0; n <= M; ++n, p *= s0) beta[n] = b.coeffs[n] * ExactComplex(p);
    auto c = std::make_shared<std::vector<cplx>>(M + 1);
    for (int m = 0; m <= M; ++m) {
      ExactComplex acc = m == 0 ? beta[0] : ExactComplex();
      for (int n = 1; n <= m; ++n) {
        if (beta[n].is_zero()) continue;
        mpz_class binom;
        mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(m + n - 1), static_cast<unsigned long>(m - n));
        mpz_class four;
        mpz_ui_pow_ui(four.get_mpz_t(), 4, static_cast<unsigned long>(n));
        acc += beta[n] * ExactComplex(Rational(binom * four));
      }
      (*c)[m] = ScalarTraits<ExactComplex>::to_cplx(acc);
    }
    return std::make_shared<SlitPlaneGerm>(std::move(name), c, s0.get_d());
  }

  static cplx to_disc(cplx zeta, double s0) {
    const cplx r = std::sqrt(1.0 + zeta / s0);
    return (r - 1.0) / (r + 1.0);
  }

  /// Size of the first omitted terms at zeta, a heuristic truncation error.
  double tail_estimate(cplx zeta) const {
    const double w = std::abs(to_disc(zeta, s0_));
    const std::size_t M = c_->size() - 1;
    const double last = std::max(std::abs((*c_)[M]), std::abs((*c_)[M - 1]));
    return last * std::pow(w, double(M)) / std::max(1e-12, 1.0 - w);
  }
  const std::vector<cplx>& disc_coefficients() const { return *c_; }

 private:
  static cplx eval(const std::vector<cplx>& c, double s0, cplx zeta) {
    const cplx w = to_disc(zeta, s0);
    cplx acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * w + c[k];
    return acc;
  }

  std::shared_ptr<const std::vector<cplx>> c_;
  double s0_;
};

struct LaplaceValue {
  cplx value;
  /// Quadrature error estimate plus the certified tail bound.
  double error_estimate = 0.0;
  double radius = 0.0;
  double tail_bound = 0.0;
  double theta = 0.0;
};

/// c + integral of phi_hat(zeta) e^{-z zeta} along the ray of direction theta, truncated at the
/// radius where the certificate makes the tail smaller than tol/2.
inline LaplaceValue laplace_sum(const SummableSeries& s, cplx z, double theta, double tol = 1e-10) {
  if (!s.A.contains(theta)) fail(ErrorCode::DomainError, "direction outside the interval A");
  if (!s.certificate) fail(ErrorCode::TailBoundUnavailable, s.name + ": no exponential certificate");
  const ExpCertificate& cert = *s.certificate;
  const cplx e = std::polar(1.0, theta);
  const double gap = (z * e).real() - cert.tau;
  if (!(gap > 0.0)) fail(ErrorCode::OutsideHalfPlane, "Re(z e^{i theta}) <= tau");
  LaplaceValue out;
  out.theta = theta;
  out.value = s.constant();
  if (!s.germ || cert.C == 0.0) return out;
  const double ratio = 2.0 * cert.C / (gap * tol);
  out.radius = ratio > 1.0 ? std::log(ratio) / gap : 0.0;
  out.radius = std::max(out.radius, 1.0 / gap);
  out.tail_bound = cert.C * std::exp(-gap * out.radius) / gap;
  const GermPtr& g = s.germ;
  auto f = [&](double t) -> cplx { return g->eval_principal(t * e) * std::exp(-z * e * t) * e; };
  const double chunk = std::min(2.0, 4.0 / std::max(1.0, std::abs(z)));
  cplx acc = 0.0;
  double qerr = 0.0;
  for (double a = 0.0; a < out.radius; a += chunk) {
    const double b = std::min(out.radius, a + chunk);
    double err = 0.0;
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-14, &err);
    qerr += err;
  }
  out.value += acc;
  out.error_estimate = qerr + out.tail_bound;
  if (out.error_estimate > tol)
    fail(ErrorCode::ToleranceNotMet, s.name + ": Laplace quadrature error " + std::to_string(out.error_estimate) +
                                         " above " + std::to_string(tol));
  return out;
}

/// Sum in the best direction of A for z.
inline LaplaceValue laplace_sum_best(const SummableSeries& s, cplx z, double tol = 1e-10) {
  return laplace_sum(s, z, s.A.best_theta(z), tol);
}

inline Report direction_independence_check(const SummableSeries& s, cplx z, double theta1, double theta2,
                                           double tol = 1e-10) {
  const LaplaceValue a = laplace_sum(s, z, theta1, tol);
  const LaplaceValue b = laplace_sum(s, z, theta2, tol);
  Report r;
  r.title = "direction independence";
  r.add(Check::leq("direction_independence", std::abs(a.value - b.value), 2.0 * tol,
                   s.name + " theta=" + std::to_string(theta1) + "," + std::to_string(theta2)));
  r.extra = {{"value1", {a.value.real(), a.value.imag()}}, {"value2", {b.value.real(), b.value.imag()}}};
  return r;
}

/// Truncation errors |Sum(z) - c - sum_{n<N} a_n z^{-n-1}| compared with C' sigma^N N! |z|^{-N-1}.
/// C' and sigma are fitted on the orders 1..N-1 (an envelope of a least-squares line in log scale),
/// then the bound is checked at order N, so the check is a prediction. sigma is never taken below
/// 1/R0, R0 the convergence radius of the germ at 0, which is the rate the Cauchy estimates give.
/// With fewer than two usable fit orders sigma is 1/R0 (or 1/rho for an entire germ).
inline Report gevrey_asymptotic_check(const SummableSeries& s, const std::vector<cplx>& zs, int N, double tol = 1e-12) {
  if (N < 1) fail(ErrorCode::DomainError, "Gevrey check needs N >= 1");
  if (s.series.order() < N - 1) fail(ErrorCode::TruncationExceeded, "series order below N - 1");
  std::vector<std::vector<double>> err(zs.size(), std::vector<double>(N + 1));
  std::vector<cplx> sums;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const cplx z = zs[i];
    const cplx v = laplace_sum_best(s, z, tol).value;
    sums.push_back(v);
    cplx partial = s.constant();
    cplx zp = 1.0 / z;
    for (int k = 0; k <= N; ++k) {
      err[i][k] = std::abs(v - partial);
      if (k < N) {
        partial += s.series.coeff(k) * zp;
        zp /= z;
      }
    }
  }
  auto q = [&](std::size_t i, int k) {
    return err[i][k] * std::pow(std::abs(zs[i]), k + 1.0) / std::tgamma(k + 1.0);
  };
  std::vector<double> ks, logs;
  std::vector<double> Q(N + 1, 0.0);
  for (int k = 1; k < N; ++k) {
    for (std::size_t i = 0; i < zs.size(); ++i) Q[k] = std::max(Q[k], q(i, k));
    if (Q[k] > 0.0) {
      ks.push_back(k);
      logs.push_back(std::log(Q[k]));
    }
  }
  const double R0 = s.germ ? s.germ->origin_radius() : std::numeric_limits<double>::infinity();
  const double sigma_floor = std::isfinite(R0) ? 1.0 / R0 : 0.0;
  double sigma = std::isfinite(R0) ? 1.0 / R0 : 1.0 / s.A.rho;
  if (ks.size() >= 2) {
    const double n = double(ks.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      sx += ks[j];
      sy += logs[j];
      sxx += ks[j] * ks[j];
      sxy += ks[j] * logs[j];
    }
    sigma = std::max(sigma_floor, std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx)));
  }
  double Cp = 0.0;
  for (int k = 1; k < N; ++k) Cp = std::max(Cp, Q[k] / std::pow(sigma, k));
  if (N == 1)
    for (std::size_t i = 0; i < zs.size(); ++i) Cp = std::max(Cp, err[i][0] * std::abs(zs[i]));
  CheckAccumulator acc("gevrey_truncation_bound", s.name + " N=" + std::to_string(N));
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double rhs = Cp * std::pow(sigma, N) * std::tgamma(N + 1.0) * std::pow(std::abs(zs[i]), -(N + 1.0));
    acc.add(err[i][N], rhs + 2.0 * tol);
  }
  Report r;
  r.title = "Gevrey asymptotics";
  r.add(acc);
  json errs = json::array();
  for (std::size_t i = 0; i < zs.size(); ++i) errs.push_back(err[i][N]);
  r.extra = {{"C_prime", Cp}, {"sigma", sigma}, {"sigma_floor", sigma_floor}, {"N", N}, {"errors_at_N", errs}};
  return r;
}

struct SeminormSampling {
  int disc_radii = 24;
  int disc_angles = 72;
  int ray_directions = 9;
  int ray_points = 600;
  double ray_radius = 30.0;
};

struct SeminormEstimate {
  double value = 0.0;
  cplx argmax = 0.0;
  std::size_t samples = 0;
};

/// |c| + max of e^{-tau |zeta|} |phi_hat(zeta)| over a polar grid of the closed disc of radius rho and
/// over points of the rays of A up to ray_radius. Any sampled maximum is a lower bound of the supremum.
inline SeminormEstimate seminorm_rho_tau(const SummableSeries& s, double rho, double tau, const SeminormSampling& sp = {}) {
  SeminormEstimate out;
  double m = 0.0;
  auto visit = [&](cplx zeta) {
    const double v = std::abs(detail::germ_value(s.germ, zeta)) * std::exp(-tau * std::abs(zeta));
    ++out.samples;
    if (v > m) {
      m = v;
      out.argmax = zeta;
    }
  };
  if (s.germ) {
    visit(0.0);
    for (int i = 1; i <= sp.disc_radii; ++i)
      for (int k = 0; k < sp.disc_angles; ++k)
        visit(std::polar(rho * i / sp.disc_radii, 2.0 * std::numbers::pi * k / sp.disc_angles));
    for (double th : s.A.directions(sp.ray_directions))
      for (int j = 1; j <= sp.ray_points; ++j) visit(std::polar(sp.ray_radius * j / sp.ray_points, th));
  }
  out.value = std::abs(s.constant()) + m;
  return out;
}

/// Check of |Sum phi(z)| <= ||phi||_{rho,tau} / (tau' - tau) for phi without constant term and z in the
/// half-plane union for tau'.
inline Report laplace_estimate_check(const SummableSeries& s, const std::vector<cplx>& zs, double tau_prime,
                                     const SeminormSampling& sp = {}, double tol = 1e-10) {
  if (s.series.has_constant_term()) fail(ErrorCode::ConstantTermPresent, "estimate applies to series without constant term");
  const double tau = s.A.tau;
  if (!(tau_prime > tau)) fail(ErrorCode::DomainError, "tau' must exceed tau");
  const double norm = seminorm_rho_tau(s, s.A.rho, tau, sp).value;
  CheckAccumulator acc("laplace_sum_estimate", s.name);
  for (cplx z : zs) {
    if (!(s.A.gap(z, tau_prime) > 0.0)) fail(ErrorCode::OutsideHalfPlane, "sample outside the half-plane union for tau'");
    acc.add(std::abs(laplace_sum_best(s, z, tol).value), norm / (tau_prime - tau) + tol);
  }
  Report r;
  r.title = "Laplace sum estimate";
  r.add(acc);
  r.extra = {{"seminorm", norm}, {"tau_prime", tau_prime}};
  return r;
}

enum class SummableOp { Product, Derivative, Substitute, Implicit, Compose, Invert };

inline SummableOp summable_op_from_string(const std::string& s) {
  static const std::map<std::string, SummableOp> m{{"product", SummableOp::Product},       {"derivative", SummableOp::Derivative},
                                                  {"substitute", SummableOp::Substitute}, {"implicit", SummableOp::Implicit},
                                                  {"compose", SummableOp::Compose},       {"invert", SummableOp::Invert}};
  auto it = m.find(s);
  if (it == m.end()) fail(ErrorCode::ParseError, "unknown operation '" + s + "'");
  return it->second;
}

struct SummableOpsOptions {
  double epsilon = 1.0;
  int derivative_order = 1;
  /// Order of the exact formal computation whose Borel image feeds the slit-plane germ.
  int exact_order = 60;
  /// Evaluation points; when empty, `default_points` points are generated in the relevant half-plane union.
  std::vector<cplx> points;
  std::size_t default_points = 5;
  double tol = 1e-10;
  double identity_tol = 1e-6;
  /// Step of the central difference used for the derivative identity.
  double fd_step = 1e-3;
  SeminormSampling sampling;
  CertificateOptions certificate;
  /// Substitution: h(w) = sum_k family[k] w^k with ||h_k|| <= A B^k.
  std::vector<ExactComplex> family;
  double family_A = 1.0;
  double family_B = 1.0;
  /// Implicit equation lambda z^{-1} + sum_{k>=1} implicit_coeffs[k-1] y^k = 0.
  ExactComplex implicit_lambda{Rational(1)};
  std::vector<ExactComplex> implicit_coeffs;
  int implicit_terms = 600;
};

namespace detail {

inline std::vector<cplx> default_points(const DirectionInterval& A, double tau_eval, std::size_t count) {
  std::vector<cplx> zs;
  const cplx rot = std::polar(1.0, -A.center());
  for (std::size_t k = 0; k < count; ++k) {
    const double re = tau_eval + 1.0 + 0.75 * double(k);
    const double im = 0.6 * (double(k % 3) - 1.0) * (1.0 + 0.5 * double(k));
    zs.push_back(rot * cplx(re, im));
  }
  return zs;
}

inline double slit_of(const std::vector<SummableSeries>& in) {
  double s0 = std::numeric_limits<double>::infinity();
  for (const auto& s : in) {
    if (!s.slit_start) fail(ErrorCode::DomainError, s.name + ": germ not known to be analytic off (-inf, -s0]");
    if (!s.exact) fail(ErrorCode::DomainError, s.name + ": exact coefficients are required");
    s0 = std::min(s0, *s.slit_start);
  }
  return s0;
}

inline SummableSeries slit_summable(const std::string& name, const ExactSeries& phi, double s0, const DirectionInterval& A,
                                    double tau, const CertificateOptions& copt) {
  Rational q;
  q = s0;
  auto g = SlitPlaneGerm::from_borel(name, borel(phi.without_constant()), q);
  FloatSeries fs = to_float(phi);
  SummableSeries out{name, fs, g, A, std::nullopt, phi, s0};
  DirectionInterval At = A;
  At.tau = tau;
  out.A = At;
  out.certificate = measure_certificate(g, At, tau, copt);
  return out;
}

inline SummableSeries product_summable(const std::vector<SummableSeries>& in, double tau, const CertificateOptions& copt) {
  const std::size_t n = in.size();
  std::vector<cplx> cs;
  std::vector<GermPtr> gs;
  FloatSeries prod = in[0].series;
  for (std::size_t i = 0; i < n; ++i) {
    cs.push_back(in[i].constant());
    gs.push_back(in[i].germ);
    if (i > 0) prod = cauchy_product(prod, in[i].series);
  }
  auto eval = [cs, gs](cplx zeta) {
    const std::size_t n = cs.size();
    cplx acc = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
      // mask marks the factors contributing their germ; the others contribute their constant.
      cplx c = 1.0;
      std::vector<GermPtr> part;
      bool zero = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) {
          if (!gs[i]) zero = true;
          part.push_back(gs[i]);
        } else {
          c *= cs[i];
        }
      }
      if (zero || c == 0.0) continue;
      acc += c * (part.size() == 1 ? part[0]->eval_principal(zeta) : principal_convolution(part, zeta, 1e-13).value);
    }
    return acc;
  };
  auto dist = [gs](cplx z) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& g : gs)
      if (g) d = std::min(d, g->singular_distance(z));
    return d;
  };
  SummableSeries out{"product", prod, std::make_shared<MeromorphicGerm>("product", eval, dist), in[0].A,
                     std::nullopt, std::nullopt, std::nullopt};
  out.A.tau = tau;
  out.certificate = measure_certificate(out.germ, out.A, tau, copt);
  return out;
}

inline cplx sum_at(const SummableSeries& s, cplx z, double tol) { return laplace_sum_best(s, z, tol).value; }

/// Coefficients b_n = Y_{n+1}/n! of the Borel image of the solution y = sum Y_n x^n of
/// lambda x + sum_k c_k y^k = 0, computed in long double.
inline std::vector<long double> implicit_borel_coefficients(cplx lambda, const std::vector<cplx>& c, int K,
                                                            std::vector<long double>* Y_out = nullptr) {
  if (c.empty() || c[0] == 0.0) fail(ErrorCode::DegenerateLinearPart, "linear coefficient must be nonzero");
  for (const auto& v : c)
    if (v.imag() != 0.0 || lambda.imag() != 0.0) fail(ErrorCode::DomainError, "implicit check supports real coefficients");
  const long double c1 = c[0].real();
  const int deg = static_cast<int>(c.size());
  // P[k][n] = [x^n] y^k.
  std::vector<std::vector<long double>> P(deg + 1, std::vector<long double>(K + 1, 0.0L));
  std::vector<long double> Y(K + 1, 0.0L);
  for (int n = 1; n <= K; ++n) {
    long double rhs = n == 1 ? (long double)lambda.real() : 0.0L;
    for (int k = 2; k <= deg; ++k) {
      long double s = 0.0L;
      for (int j = 1; j <= n - 1; ++j) s += Y[j] * P[k - 1][n - j];
      P[k][n] = s;
      rhs += (long double)c[k - 1].real() * s;
    }
    Y[n] = -rhs / c1;
    P[1][n] = Y[n];
  }
  std::vector<long double> b(K);
  for (int n = 1; n <= K; ++n) {
    const long double a = std::fabs(Y[n]);
    b[n - 1] = a == 0.0L ? 0.0L : std::copysign(std::exp(std::log(a) - std::lgamma((long double)n)), Y[n]);
  }
  if (Y_out) *Y_out = Y;
  return b;
}

}  // namespace detail

/// Performs the formal operation, builds the Borel germ of the result, checks the seminorm inequality
/// at the shifted parameters and the functional identity for the sums at sample points.
inline Report summable_ops_check(SummableOp op, const std::vector<SummableSeries>& in, const SummableOpsOptions& opt = {}) {
  if (in.empty() && op != SummableOp::Implicit) fail(ErrorCode::DomainError, "no inputs");
  Report r;
  const DirectionInterval A = in.empty() ? DirectionInterval{} : in[0].A;
  const double rho = A.rho, tau = A.tau, tol = opt.tol;
  auto norm = [&](const SummableSeries& s, double t) { return seminorm_rho_tau(s, rho, t, opt.sampling).value; };
  auto points = [&](double tau_eval) {
    return opt.points.empty() ? detail::default_points(A, tau_eval, opt.default_points) : opt.points;
  };
  json norms = json::array();
  for (const auto& s : in) norms.push_back(norm(s, tau));

  switch (op) {
    case SummableOp::Product: {
      r.title = "summable product";
      const double tp = tau + opt.epsilon;
      const auto prod = detail::product_summable(in, tp, opt.certificate);
      double rhs = std::max(1.0, std::pow(opt.epsilon, -double(in.size() - 1)));
      for (const auto& v : norms) rhs *= v.get<double>();
      r.add(Check::leq("product_seminorm", norm(prod, tp), rhs, "tau+eps=" + std::to_string(tp)));
      CheckAccumulator id("sum_of_product", "|Sum(prod) - prod(Sum)|");
      for (cplx z : points(tp)) {
        cplx p = 1.0;
        for (const auto& s : in) p *= detail::sum_at(s, z, tol);
        id.add(std::abs(detail::sum_at(prod, z, tol) - p), opt.identity_tol);
      }
      r.add(id);
      break;
    }
    case SummableOp::Derivative: {
      r.title = "summable derivative";
      const auto& s = in[0];
      const int N = opt.derivative_order;
      const double tp = tau + opt.epsilon;
      FloatSeries d = s.series;
      for (int k = 0; k < N; ++k) d = derive(d);
      const GermPtr g0 = s.germ;
      GermPtr g;
      if (g0)
        g = std::make_shared<MeromorphicGerm>(
            "derivative", [g0, N](cplx zeta) { return std::pow(-zeta, N) * g0->eval_principal(zeta); },
            [g0](cplx z) { return g0->singular_distance(z); });
      DirectionInterval At = A;
      At.tau = tp;
      const auto ds = make_summable("derivative", d, g, At, opt.certificate);
      r.add(Check::leq("derivative_seminorm", norm(ds, tp),
                       std::tgamma(N + 1.0) / std::pow(opt.epsilon, N) * norms[0].get<double>(),
                       "N=" + std::to_string(N)));
      if (N == 1) {
        CheckAccumulator id("sum_of_derivative", "central difference");
        const double h = opt.fd_step;
        for (cplx z : points(tp)) {
          const cplx fd = (detail::sum_at(s, z + h, tol) - detail::sum_at(s, z - h, tol)) / (2.0 * h);
          id.add(std::abs(detail::sum_at(ds, z, tol) - fd), opt.identity_tol);
        }
        r.add(id);
      }
      break;
    }
    case SummableOp::Substitute: {
      r.title = "summable substitution";
      const auto& s = in[0];
      if (s.series.has_constant_term()) fail(ErrorCode::ConstantTermPresent, "substituted series must have no constant term");
      const double s0 = detail::slit_of(in);
      const int M = std::min(opt.exact_order, s.exact->order());
      ConvergentFamily<ExactComplex> H(1, required_depth(M), M);
      for (std::size_t k = 0; k < opt.family.size() && int(k) <= required_depth(M); ++k)
        H.set({int(k)}, ExactSeries::constant_series(opt.family[k], M));
      const ExactSeries res = substitute(H, {s.exact->truncated(M)});
      const double tp = tau + opt.family_B * norms[0].get<double>();
      const auto rs = detail::slit_summable("substitution", res, s0, A, tp, opt.certificate);
      r.add(Check::leq("substitution_seminorm", norm(rs, tp),
                       opt.family_A * (2.0 + opt.family_B * norms[0].get<double>()), "tau'=" + std::to_string(tp)));
      CheckAccumulator id("sum_of_substitution", "|Sum(H(phi)) - h(Sum phi)|");
      for (cplx z : points(tp)) {
        const cplx w = detail::sum_at(s, z, tol);
        cplx hw = 0.0, p = 1.0;
        for (const auto& c : opt.family) {
          hw += ScalarTraits<ExactComplex>::to_cplx(c) * p;
          p *= w;
        }
        id.add(std::abs(detail::sum_at(rs, z, tol) - hw), opt.identity_tol);
      }
      r.add(id);
      break;
    }
    case SummableOp::Implicit: {
      r.title = "summable implicit solution";
      // Exact solution through the H_m formula, then the Borel germ from the convergent series.
      const int M = 10;
      const std::vector<ExactComplex>& cs = opt.implicit_coeffs;
      ConvergentFamily<ExactComplex> F(1, required_depth(M), M);
      ExactSeries f0(M);
      f0.coeff(0) = opt.implicit_lambda;
      F.set({0}, f0);
      for (std::size_t k = 0; k < cs.size() && int(k + 1) <= required_depth(M); ++k)
        F.set({int(k + 1)}, ExactSeries::constant_series(cs[k], M));
      const ExactSeries phi = implicit_solve(F);  // raises ResidualCheckFailed if F(z, phi) != 0
      r.add(Check::leq("exact_residual", 0.0, 0.0, "F(z, phi) vanishes through order " + std::to_string(M)));
      std::vector<cplx> cf;
      for (const auto& c : cs) cf.push_back(ScalarTraits<ExactComplex>::to_cplx(c));
      const cplx lam = ScalarTraits<ExactComplex>::to_cplx(opt.implicit_lambda);
      std::vector<long double> Y;
      auto b = std::make_shared<std::vector<long double>>(
          detail::implicit_borel_coefficients(lam, cf, opt.implicit_terms, &Y));
      double dev = 0.0;
      const auto bex = borel(phi);
      for (int n = 0; n <= M; ++n) {
        const cplx e = ScalarTraits<ExactComplex>::to_cplx(bex.coeffs[n]);
        dev = std::max(dev, std::abs(e - cplx(double((*b)[n]))) / std::max(1.0, std::abs(e)));
      }
      r.add(Check::leq("germ_taylor_match", dev, 1e-12));
      // Exponential type from the root test on the solution coefficients.
      double growth = 0.0;
      for (int n = opt.implicit_terms / 2; n <= opt.implicit_terms; ++n)
        if (Y[n] != 0.0L) growth = std::max(growth, double(std::pow(std::fabs(Y[n]), 1.0L / n)));
      const double t_sol = 1.05 * growth + 0.05;
      const GermPtr g = std::make_shared<MeromorphicGerm>(
          "implicit_solution",
          [b](cplx zeta) {
            std::complex<long double> acc = 0.0L, zz(zeta.real(), zeta.imag());
            for (std::size_t k = b->size(); k-- > 0;) acc = acc * zz + (*b)[k];
            return cplx(double(acc.real()), double(acc.imag()));
          },
          [](cplx) { return std::numeric_limits<double>::infinity(); });
      DirectionInterval At = in.empty() ? DirectionInterval{} : A;
      At.tau = t_sol;
      // Keep the sampled rays inside the range where the stored terms are accurate.
      CertificateOptions copt = opt.certificate;
      copt.radius = std::min(copt.radius, double(opt.implicit_terms) / (3.0 * std::max(1.0, growth)));
      const auto sol = make_summable("implicit_solution", to_float(phi), g, At, copt);
      CheckAccumulator id("functional_equation", "|F(z, Sum phi(z))|");
      for (cplx z : opt.points.empty() ? detail::default_points(At, t_sol + 1.0, opt.default_points) : opt.points) {
        const cplx y = detail::sum_at(sol, z, tol);
        cplx v = lam / z, p = y;
        for (const auto& c : cf) {
          v += c * p;
          p *= y;
        }
        id.add(std::abs(v), opt.identity_tol);
      }
      r.add(id);
      r.extra["tau_solution"] = t_sol;
      r.extra["growth"] = growth;
      break;
    }
    case SummableOp::Compose: {
      r.title = "summable composition";
      if (in.size() != 2) fail(ErrorCode::DomainError, "compose needs the phi parts of f and g");
      const double s0 = detail::slit_of(in);
      const int M = std::min({opt.exact_order, in[0].exact->order(), in[1].exact->order()});
      const FormalDiffeo<ExactComplex> f{in[0].exact->truncated(M)}, g{in[1].exact->truncated(M)};
      const auto gf = compose(g, f);
      const double nf = norms[0].get<double>(), ng = norms[1].get<double>();
      const double tp = tau + 1.0 + nf;
      const auto rs = detail::slit_summable("composition", gf.phi, s0, A, tp, opt.certificate);
      r.add(Check::leq("composition_seminorm", norm(rs, tp), nf + ng, "tau'=" + std::to_string(tp)));
      CheckAccumulator id("sum_of_composition", "|Sum(g o f) - Sum g o Sum f|");
      for (cplx z : points(tp)) {
        const cplx w = z + detail::sum_at(in[0], z, tol);
        const cplx rhs = w + detail::sum_at(in[1], w, tol);
        id.add(std::abs(z + detail::sum_at(rs, z, tol) - rhs), opt.identity_tol);
      }
      r.add(id);
      r.extra["tau_prime"] = tp;
      r.extra["tail_estimate"] = std::static_pointer_cast<const SlitPlaneGerm>(rs.germ)->tail_estimate(cplx(rs.certificate->radius, 0.0));
      break;
    }
    case SummableOp::Invert: {
      r.title = "summable inverse";
      const double s0 = detail::slit_of(in);
      const int M = std::min(opt.exact_order, in[0].exact->order());
      const FormalDiffeo<ExactComplex> f{in[0].exact->truncated(M)};
      const auto h = invert(f);
      const double nf = norms[0].get<double>();
      const double tp = tau + 1.0 + nf;
      const auto rs = detail::slit_summable("inverse", h.phi, s0, A, tp, opt.certificate);
      r.add(Check::leq("inverse_seminorm", norm(rs, tp), nf, "tau'=" + std::to_string(tp)));
      CheckAccumulator id("inverse_of_sum", "|Sum(f^{-1})(Sum f(z)) - z|");
      const double tpp = tp + 1.0;
      for (cplx z : points(tpp)) {
        const cplx w = z + detail::sum_at(in[0], z, tol);
        id.add(std::abs(w + detail::sum_at(rs, w, tol) - z), opt.identity_tol);
      }
      r.add(id);
      r.extra["tau_prime"] = tp;
      r.extra["tau_second"] = tpp;
      break;
    }
  }
  r.extra["input_seminorms"] = norms;
  return r;
}

}  // namespace resurgence
