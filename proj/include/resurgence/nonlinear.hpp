#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "germ.hpp"
#include "known_series.hpp"
#include "omega.hpp"
#include "report.hpp"
#include "series.hpp"
#include "series_json.hpp"

namespace resurgence {

using MultiIndex = std::vector<int>;

inline int index_weight(const MultiIndex& k) {
  int s = 0;
  for (int v : k) s += v;
  return s;
}

namespace detail {

inline Rational factorial_q(int n) {
  mpz_class f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return Rational(f);
}

template <SeriesScalar S>
S rational_scalar(const Rational& q) {
  return scalar_from_rational<S>(q);
}

}  // namespace detail

/// Growth certificate ||H_k||_K <= A B^{|k|}.
struct GrowthCertificate {
  double A = 1.0;
  double B = 1.0;
};

/// Series in z^{-1} and w_1..w_r, stored as the coefficients H_k(z) for |k| <= depth.
/// Entries that are not set are zero; entries beyond the depth are unknown, and any operation
/// that would need them fails.
template <SeriesScalar S>
class ConvergentFamily {
 public:
  using Series = TruncatedSeries<S>;

  ConvergentFamily(int variables, int depth, int order) : r_(variables), depth_(depth), order_(order) {
    if (variables < 1 || depth < 0 || order < 0) fail(ErrorCode::DomainError, "invalid family shape");
  }

  int variables() const { return r_; }
  int depth() const { return depth_; }
  /// Common truncation order of the coefficients.
  int order() const { return order_; }
  const std::map<MultiIndex, Series>& terms() const { return terms_; }

  void set(const MultiIndex& k, const Series& h) {
    if (static_cast<int>(k.size()) != r_) fail(ErrorCode::DomainError, "multi-index has the wrong length");
    for (int v : k)
      if (v < 0) fail(ErrorCode::DomainError, "negative multi-index entry");
    if (index_weight(k) > depth_) fail(ErrorCode::InsufficientFamilyDepth, "multi-index beyond the family depth");
    if (h.order() < order_) fail(ErrorCode::TruncationExceeded, "coefficient has a lower truncation order than the family");
    terms_[k] = h.truncated(order_);
  }

  Series get(const MultiIndex& k) const {
    if (index_weight(k) > depth_) fail(ErrorCode::InsufficientFamilyDepth, "multi-index beyond the family depth");
    auto it = terms_.find(k);
    return it == terms_.end() ? Series(order_) : it->second;
  }

  std::optional<GrowthCertificate> growth;

  /// exp(w) = sum w^k / k!.
  static ConvergentFamily exp_family(int depth, int order) {
    ConvergentFamily f(1, depth, order);
    for (int k = 0; k <= depth; ++k)
      f.set({k}, Series::constant_series(detail::rational_scalar<S>(1 / detail::factorial_q(k)), order));
    f.growth = GrowthCertificate{1.0, 1.0};
    return f;
  }

  /// 1/(c + w) = sum (-1)^k c^{-k-1} w^k.
  static ConvergentFamily reciprocal_family(const S& c, int depth, int order) {
    if (ScalarTraits<S>::is_zero(c)) fail(ErrorCode::DomainError, "reciprocal family needs c != 0");
    ConvergentFamily f(1, depth, order);
    S p = ScalarTraits<S>::one() / c;
    for (int k = 0; k <= depth; ++k) {
      f.set({k}, Series::constant_series(k % 2 ? -p : p, order));
      p = p / c;
    }
    const double ac = std::abs(ScalarTraits<S>::to_cplx(c));
    f.growth = GrowthCertificate{1.0 / ac, 1.0 / ac};
    return f;
  }

  /// Product in C[[z^{-1}, w]], truncated at the smaller depth and order.
  friend ConvergentFamily operator*(const ConvergentFamily& a, const ConvergentFamily& b) {
    if (a.r_ != b.r_) fail(ErrorCode::DomainError, "families have different numbers of variables");
    ConvergentFamily out(a.r_, std::min(a.depth_, b.depth_), std::min(a.order_, b.order_));
    std::map<MultiIndex, Series> acc;
    for (const auto& [ka, ha] : a.terms_)
      for (const auto& [kb, hb] : b.terms_) {
        MultiIndex k(a.r_);
        for (int i = 0; i < a.r_; ++i) k[i] = ka[i] + kb[i];
        if (index_weight(k) > out.depth_) continue;
        Series p = cauchy_product(ha.truncated(out.order_), hb.truncated(out.order_));
        auto it = acc.find(k);
        if (it == acc.end())
          acc.emplace(k, std::move(p));
        else
          it->second += p;
      }
    for (auto& [k, h] : acc) out.set(k, h);
    return out;
  }

  json to_json() const {
    json terms = json::array();
    for (const auto& [k, h] : terms_) terms.push_back({{"k", k}, {"series", series_to_json(h)}});
    json j{{"variables", r_}, {"depth", depth_}, {"order", order_}, {"terms", terms}};
    if (growth) j["growth"] = {{"A", growth->A}, {"B", growth->B}};
    return j;
  }

  static ConvergentFamily from_json(const json& j) {
    try {
      ConvergentFamily f(j.at("variables").get<int>(), j.at("depth").get<int>(), j.at("order").get<int>());
      for (const auto& t : j.at("terms")) {
        const AnySeries any = series_from_json(t.at("series"));
        Series s;
        if constexpr (is_exact_v<S>) {
          s = std::holds_alternative<ExactSeries>(any) ? std::get<ExactSeries>(any) : to_exact(std::get<FloatSeries>(any));
        } else {
          s = std::holds_alternative<FloatSeries>(any) ? std::get<FloatSeries>(any) : to_float(std::get<ExactSeries>(any));
        }
        f.set(t.at("k").get<MultiIndex>(), s);
      }
      if (j.contains("growth")) f.growth = GrowthCertificate{j["growth"].at("A").get<double>(), j["growth"].at("B").get<double>()};
      return f;
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, std::string("family JSON: ") + e.what());
    }
  }

 private:
  int r_;
  int depth_;
  int order_;
  std::map<MultiIndex, Series> terms_;
};

/// Depth a family needs for substitution at truncation order N: a product of m series without
/// constant term starts at z^{-m}, which is coefficient m-1, so |k| <= N+1 contributes.
inline int required_depth(int order) { return order + 1; }

/// sum_k H_k phi_1^{k_1} ... phi_r^{k_r}, truncated at the smallest order involved.
template <SeriesScalar S>
TruncatedSeries<S> substitute(const ConvergentFamily<S>& H, const std::vector<TruncatedSeries<S>>& args) {
  if (static_cast<int>(args.size()) != H.variables()) fail(ErrorCode::DomainError, "wrong number of arguments");
  int N = H.order();
  for (const auto& a : args) {
    if (a.has_constant_term()) fail(ErrorCode::ConstantTermPresent, "substituted series must have no constant term");
    N = std::min(N, a.order());
  }
  if (H.depth() < required_depth(N))
    fail(ErrorCode::InsufficientFamilyDepth, "family depth " + std::to_string(H.depth()) + " < " +
                                                 std::to_string(required_depth(N)) + " needed at order " +
                                                 std::to_string(N));
  const int D = required_depth(N);
  std::vector<std::vector<TruncatedSeries<S>>> pw(args.size());
  for (std::size_t j = 0; j < args.size(); ++j) {
    pw[j].push_back(TruncatedSeries<S>::constant_series(ScalarTraits<S>::one(), N));
    const auto a = args[j].truncated(N);
    for (int p = 1; p <= D; ++p) pw[j].push_back(cauchy_product(pw[j].back(), a));
  }
  TruncatedSeries<S> out(N);
  for (const auto& [k, h] : H.terms()) {
    if (index_weight(k) > D) continue;
    TruncatedSeries<S> term = h.truncated(N);
    for (std::size_t j = 0; j < args.size(); ++j)
      if (k[j] > 0) term = cauchy_product(term, pw[j][k[j]]);
    out += term;
  }
  return out;
}

/// Bound C A exp(C B sum_j ||phi_j||) for a substituted family with a growth certificate.
inline double substitution_bound(const GrowthCertificate& g, double C, const std::vector<double>& seminorms) {
  double s = 0.0;
  for (double x : seminorms) s += x;
  return C * g.A * std::exp(C * g.B * s);
}

/// phi(z + c) for phi = c0 + sum a_n z^{-n-1}: (z + c)^{-n-1} = sum_j C(n+j, j) (-c)^j z^{-n-j-1}.
template <SeriesScalar S>
TruncatedSeries<S> translate(const TruncatedSeries<S>& phi, const S& c) {
  const int N = phi.order();
  TruncatedSeries<S> out(N);
  out.constant() = phi.constant();
  if (ScalarTraits<S>::is_zero(c)) {
    for (int m = 0; m <= N; ++m) out.coeff(m) = phi.coeff(m);
    return out;
  }
  std::vector<S> mc(N + 1, ScalarTraits<S>::one());
  for (int j = 1; j <= N; ++j) mc[j] = mc[j - 1] * (-c);
  for (int m = 0; m <= N; ++m) {
    S acc = ScalarTraits<S>::zero();
    mpz_class binom = 1;  // C(m, m-n) for n = m, m-1, ..., 0
    for (int j = 0; j <= m; ++j) {
      const int n = m - j;
      if (!ScalarTraits<S>::is_zero(phi.coeff(n))) acc += phi.coeff(n) * mc[j] * detail::rational_scalar<S>(Rational(binom));
      binom = binom * (m - j) / (j + 1);
    }
    out.coeff(m) = acc;
  }
  return out;
}

/// Tangent-to-identity formal diffeomorphism z + phi(z).
template <SeriesScalar S>
struct FormalDiffeo {
  TruncatedSeries<S> phi;

  static FormalDiffeo identity(int order) { return {TruncatedSeries<S>(order)}; }
  static FormalDiffeo shift(const S& c, int order) { return {TruncatedSeries<S>::constant_series(c, order)}; }
  int order() const { return phi.order(); }
  friend bool operator==(const FormalDiffeo& a, const FormalDiffeo& b) { return a.phi == b.phi; }
};

/// phi composed with z + psi, psi without constant term: sum_n psi^n/n! phi^{(n)}.
template <SeriesScalar S>
TruncatedSeries<S> taylor_compose(const TruncatedSeries<S>& phi, const TruncatedSeries<S>& psi0) {
  const int N = std::min(phi.order(), psi0.order());
  TruncatedSeries<S> out = phi.truncated(N);
  TruncatedSeries<S> d = phi.truncated(N).without_constant();
  TruncatedSeries<S> p = TruncatedSeries<S>::constant_series(ScalarTraits<S>::one(), N);
  const auto psi = psi0.truncated(N);
  // psi^n phi^{(n)} starts at z^{-2n-1}, i.e. coefficient 2n.
  for (int n = 1; 2 * n <= N; ++n) {
    d = derive(d);
    p = cauchy_product(p, psi);
    TruncatedSeries<S> term = cauchy_product(p, d);
    term *= detail::rational_scalar<S>(1 / detail::factorial_q(n));
    out += term;
  }
  return out;
}

/// f o g. With g = z + c + psi0, phi(g) = phi(. + c) composed with z + psi0.
template <SeriesScalar S>
FormalDiffeo<S> compose(const FormalDiffeo<S>& f, const FormalDiffeo<S>& g) {
  const int N = std::min(f.order(), g.order());
  const auto psi = g.phi.truncated(N);
  const S c = psi.constant();
  auto psi0 = psi.without_constant();
  auto shifted = translate(f.phi.truncated(N), c);
  return {psi + taylor_compose(shifted, psi0)};
}

/// Inverse under composition. f = (z + c) o (z + phi0), so f^{-1}(z) = h0(z - c) with h0 the
/// Lagrange reversion z + sum_k (-1)^k/k! (d/dz)^{k-1}(phi0^k).
template <SeriesScalar S>
FormalDiffeo<S> invert(const FormalDiffeo<S>& f) {
  const int N = f.order();
  const S c = f.phi.constant();
  const auto phi0 = f.phi.without_constant();
  TruncatedSeries<S> chi(N);
  TruncatedSeries<S> pw = TruncatedSeries<S>::constant_series(ScalarTraits<S>::one(), N);
  // (d/dz)^{k-1} phi0^k starts at z^{-2k+1}, coefficient 2k-2.
  for (int k = 1; 2 * k - 2 <= N; ++k) {
    pw = cauchy_product(pw, phi0);
    TruncatedSeries<S> t = pw;
    for (int i = 0; i < k - 1; ++i) t = derive(t);
    t *= detail::rational_scalar<S>(Rational(k % 2 ? -1 : 1) / detail::factorial_q(k));
    chi += t;
  }
  auto h = translate(chi, -c);
  h.constant() = h.constant() - c;
  return {h};
}

/// Solution phi without constant term of F(z, phi) = 0 for F given as a family in one variable y.
/// After scaling so that dF/dy(0,0) = -1: F = -y + f + R, R_1 = F_1 + 1, R_n = F_n for n >= 2,
/// H_1 = (1 - R_1)^{-1},
/// H_m = sum_{r >= 0} sum_{s=1}^{m-1} (m+r+s-1)!/(m! r! s!) R_1^r sum_{j_i >= 2, |j| = m+s-1} R_{j_1}...R_{j_s},
/// and phi = sum_m H_m f^m. The residual F(z, phi) is checked before returning.
template <SeriesScalar S>
TruncatedSeries<S> implicit_solve(const ConvergentFamily<S>& F, int order = -1) {
  using Ser = TruncatedSeries<S>;
  using T = ScalarTraits<S>;
  if (F.variables() != 1) fail(ErrorCode::DomainError, "implicit_solve needs a family in one variable");
  const int N = order < 0 ? F.order() : std::min(order, F.order());
  const int D = required_depth(N);
  if (F.depth() < D) fail(ErrorCode::InsufficientFamilyDepth, "family depth too small for the requested order");
  if (F.get({0}).has_constant_term()) fail(ErrorCode::ConstantTermPresent, "F(0,0) must vanish");
  const S c1 = F.get({1}).constant();
  if (T::is_zero(c1)) fail(ErrorCode::DegenerateLinearPart, "dF/dy(0,0) = 0");
  const S lambda = -(T::one() / c1);
  std::vector<Ser> R(D + 1, Ser(N));
  for (int n = 1; n <= D; ++n) {
    R[n] = F.get({n}).truncated(N);
    R[n] *= lambda;
  }
  Ser f = F.get({0}).truncated(N);
  f *= lambda;
  R[1].constant() = R[1].constant() + T::one();
  const Ser one = Ser::constant_series(T::one(), N);

  std::vector<Ser> R1pow{one};
  for (int r = 1; r <= D; ++r) R1pow.push_back(cauchy_product(R1pow.back(), R[1]));

  // P[s][t]: sum over ordered s-tuples j_i >= 2 with sum t of R_{j_1}...R_{j_s}.
  const int Tmax = 2 * D;
  std::vector<std::vector<std::optional<Ser>>> P(D + 1, std::vector<std::optional<Ser>>(Tmax + 1));
  P[0][0] = one;
  for (int s = 1; s <= D; ++s)
    for (int t = 2 * s; t <= Tmax; ++t) {
      Ser acc(N);
      bool any = false;
      for (int j = 2; j <= std::min(D, t - 2 * (s - 1)); ++j) {
        if (!P[s - 1][t - j]) continue;
        acc += cauchy_product(R[j], *P[s - 1][t - j]);
        any = true;
      }
      if (any) P[s][t] = acc;
    }

  Ser phi(N);
  Ser fpow = one;
  for (int m = 1; m <= D; ++m) {
    fpow = cauchy_product(fpow, f);
    Ser Hm(N);
    if (m == 1) {
      for (int r = 0; r <= D; ++r) Hm += R1pow[r];
    } else {
      for (int s = 1; s <= m - 1; ++s) {
        const int t = m + s - 1;
        if (t > Tmax || !P[s][t]) continue;
        Ser inner(N);
        for (int r = 0; r <= D; ++r) {
          const Rational coef = detail::factorial_q(m + r + s - 1) /
                                (detail::factorial_q(m) * detail::factorial_q(r) * detail::factorial_q(s));
          inner += R1pow[r] * detail::rational_scalar<S>(coef);
        }
        Hm += cauchy_product(inner, *P[s][t]);
      }
    }
    phi += cauchy_product(Hm, fpow);
  }

  const Ser res = substitute(F, {phi});
  bool ok = !res.has_constant_term() || (!is_exact_v<S> && std::abs(T::to_cplx(res.constant())) < 1e-9);
  for (const auto& a : res.coeffs()) {
    if constexpr (is_exact_v<S>) {
      if (!T::is_zero(a)) ok = false;
    } else {
      if (!(std::abs(a) <= 1e-9 * (1.0 + std::abs(T::to_cplx(phi.coeffs().back()))))) ok = false;
    }
  }
  if (!ok) fail(ErrorCode::ResidualCheckFailed, "F(z, phi) does not vanish through the truncation order");
  return phi;
}

/// Product written as in the proof of the r! gain: with the first s factors c_i + phi_i and the
/// rest without constant term, sum over subsets I of {1..s} of prod_{i in I} c_i times the
/// remaining factors' convolution parts.
template <SeriesScalar S>
TruncatedSeries<S> subset_expansion_product(const std::vector<TruncatedSeries<S>>& factors) {
  if (factors.empty()) fail(ErrorCode::DomainError, "empty product");
  int N = factors[0].order();
  for (const auto& f : factors) N = std::min(N, f.order());
  std::vector<std::size_t> with_c, without_c;
  for (std::size_t i = 0; i < factors.size(); ++i) (factors[i].has_constant_term() ? with_c : without_c).push_back(i);
  TruncatedSeries<S> out(N);
  const std::size_t s = with_c.size();
  for (std::size_t mask = 0; mask < (std::size_t(1) << s); ++mask) {
    S c = ScalarTraits<S>::one();
    std::vector<std::size_t> parts = without_c;
    for (std::size_t b = 0; b < s; ++b) {
      if (mask >> b & 1)
        c = c * factors[with_c[b]].constant();
      else
        parts.push_back(with_c[b]);
    }
    TruncatedSeries<S> term = TruncatedSeries<S>::constant_series(c, N);
    if (parts.empty()) {
      out += term;
      continue;
    }
    for (auto i : parts) term = cauchy_product(term, factors[i].truncated(N).without_constant());
    out += term;
  }
  return out;
}

/// Inputs for the numerical check of ||prod||_K <= C^n / r! prod ||phi_i||_{K'} with
/// K = K_{delta,L}, K' = K_{delta',L'}.
struct GainCheckData {
  OmegaSet omega;
  double delta = 0.3;
  double L = 0.5;
  /// Borel germs of the factors; when empty, Taylor germs of the truncated Borel series are used.
  std::vector<GermPtr> borel_germs;
  std::size_t witnesses = 40;
  KMaxOptions kmax;
};

template <SeriesScalar S>
struct GainProduct {
  TruncatedSeries<S> product;
  std::optional<Report> report;
};

template <SeriesScalar S>
GermPtr borel_taylor_germ(const TruncatedSeries<S>& s, const std::string& name) {
  return TaylorGerm::from_borel(name, borel(s), {});
}

/// Cauchy product of the factors, at least r of which have no constant term, with an optional
/// seminorm check. The constant is the one of the unit-free convolution bound enlarged by
/// max(1, 2/delta), so that (2/delta) C^m / m! <= C_gain^m / m! for every m >= 1.
template <SeriesScalar S>
GainProduct<S> product_with_gain(const std::vector<TruncatedSeries<S>>& factors, std::size_t r,
                                 const GainCheckData* data = nullptr) {
  std::size_t without = 0;
  for (const auto& f : factors) without += f.has_constant_term() ? 0 : 1;
  if (without < r) fail(ErrorCode::DomainError, "fewer than r factors without constant term");
  if (factors.empty()) fail(ErrorCode::DomainError, "empty product");
  GainProduct<S> out{factors[0], std::nullopt};
  for (std::size_t i = 1; i < factors.size(); ++i) out.product = cauchy_product(out.product, factors[i]);
  if (!data) return out;

  const std::size_t n = factors.size();
  const auto k = convolution_bound_constants(data->delta, data->L, data->omega.rho());
  const double C = std::max(1.0, 2.0 / data->delta) * k.C;
  double rhs = std::pow(C, double(n)) / detail::factorial(r);
  json norms = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    GermPtr g = i < data->borel_germs.size() ? data->borel_germs[i] : borel_taylor_germ(factors[i], "factor");
    const double c = std::abs(ScalarTraits<S>::to_cplx(factors[i].constant()));
    const double m = estimate_k_max(*g, data->omega, k.delta_prime, k.L_prime, data->kmax).value;
    rhs *= c + m;
    norms.push_back(c + m);
  }
  const GermPtr pg = borel_taylor_germ(out.product, "product");
  double lhs_max = 0.0;
  for (const auto& w : sample_k_witnesses(data->omega, data->delta, data->L, data->witnesses)) {
    if (!is_principal_sheet(w, data->omega)) continue;
    lhs_max = std::max(lhs_max, std::abs(pg->eval_principal(w.endpoint())));
  }
  const double lhs = std::abs(ScalarTraits<S>::to_cplx(out.product.constant())) + lhs_max;
  Report rep;
  rep.title = "product seminorm bound";
  rep.add(Check::leq("product_gain_bound", lhs, rhs, "n=" + std::to_string(n) + " r=" + std::to_string(r)));
  rep.extra = {{"C", C}, {"factor_seminorms", norms}, {"delta_prime", k.delta_prime}, {"L_prime", k.L_prime}};
  out.report = rep;
  return out;
}

}  // namespace resurgence
