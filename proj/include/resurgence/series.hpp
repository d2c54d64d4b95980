#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "scalar.hpp"

namespace resurgence {

/// Formal series c + sum_{n=0}^{N} a_n z^{-n-1}, truncated at order N.
template <SeriesScalar S>
class TruncatedSeries {
 public:
  using scalar_type = S;
  using Traits = ScalarTraits<S>;

  TruncatedSeries() : constant_(Traits::zero()), coeffs_(1, Traits::zero()) {}

  /// Zero series of order N.
  explicit TruncatedSeries(int order) : constant_(Traits::zero()) {
    if (order < 0) fail(ErrorCode::DomainError, "truncation order must be non-negative");
    coeffs_.assign(static_cast<std::size_t>(order) + 1, Traits::zero());
  }

  TruncatedSeries(S constant, std::vector<S> coeffs) : constant_(std::move(constant)), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) fail(ErrorCode::DomainError, "a truncated series needs at least one coefficient");
  }

  static TruncatedSeries constant_series(S c, int order) {
    TruncatedSeries s(order);
    s.constant_ = std::move(c);
    return s;
  }

  /// The series z^{-k-1} truncated at order N (zero if k > N).
  static TruncatedSeries monomial(int k, int order, S value = Traits::one()) {
    TruncatedSeries s(order);
    if (k <= order) s.coeffs_[static_cast<std::size_t>(k)] = std::move(value);
    return s;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  static constexpr ScalarMode mode() { return Traits::mode; }

  const S& constant() const { return constant_; }
  S& constant() { return constant_; }
  const std::vector<S>& coeffs() const { return coeffs_; }

  /// Coefficient of z^{-n-1}. Reading past the truncation order is an error.
  const S& coeff(int n) const {
    check_index(n);
    return coeffs_[static_cast<std::size_t>(n)];
  }
  S& coeff(int n) {
    check_index(n);
    return coeffs_[static_cast<std::size_t>(n)];
  }

  bool has_constant_term() const { return !Traits::is_zero(constant_); }

  /// Same series, truncated at a lower order.
  TruncatedSeries truncated(int order) const {
    if (order > this->order())
      fail(ErrorCode::TruncationExceeded,
           "cannot raise truncation order " + std::to_string(this->order()) + " to " + std::to_string(order));
    return TruncatedSeries(constant_, std::vector<S>(coeffs_.begin(), coeffs_.begin() + order + 1));
  }

  TruncatedSeries without_constant() const { return TruncatedSeries(Traits::zero(), coeffs_); }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    shrink_to(o.order());
    constant_ += o.constant_;
    for (int n = 0; n <= order(); ++n) coeffs_[n] += o.coeffs_[n];
    return *this;
  }
  TruncatedSeries& operator-=(const TruncatedSeries& o) {
    shrink_to(o.order());
    constant_ -= o.constant_;
    for (int n = 0; n <= order(); ++n) coeffs_[n] -= o.coeffs_[n];
    return *this;
  }
  TruncatedSeries& operator*=(const S& k) {
    constant_ *= k;
    for (auto& a : coeffs_) a *= k;
    return *this;
  }

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator-(TruncatedSeries a) {
    a *= -Traits::one();
    return a;
  }
  friend TruncatedSeries operator*(TruncatedSeries a, const S& k) { return a *= k; }
  friend TruncatedSeries operator*(const S& k, TruncatedSeries a) { return a *= k; }
  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) { return cauchy_product(a, b); }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a.constant_ == b.constant_ && a.coeffs_ == b.coeffs_;
  }

 private:
  void check_index(int n) const {
    if (n < 0 || n > order())
      fail(ErrorCode::TruncationExceeded,
           "coefficient " + std::to_string(n) + " beyond truncation order " + std::to_string(order()));
  }
  void shrink_to(int other_order) {
    if (other_order < order()) coeffs_.resize(static_cast<std::size_t>(other_order) + 1);
  }

  S constant_;
  std::vector<S> coeffs_;
};

/// Borel image: b_n = a_n / n!, a Taylor germ sum b_n zeta^n.
template <SeriesScalar S>
struct BorelSeries {
  std::vector<S> coeffs;
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
  friend bool operator==(const BorelSeries&, const BorelSeries&) = default;
};

using ExactSeries = TruncatedSeries<ExactComplex>;
using FloatSeries = TruncatedSeries<cplx>;

template <SeriesScalar S>
std::vector<S> factorials(int n) {
  std::vector<S> f(static_cast<std::size_t>(n) + 1, ScalarTraits<S>::one());
  for (int k = 1; k <= n; ++k) f[k] = f[k - 1] * ScalarTraits<S>::from_int(k);
  return f;
}

/// Borel transform of the z^{-1}C[[z^{-1}]] part. The constant term is not folded in.
template <SeriesScalar S>
BorelSeries<S> borel(const TruncatedSeries<S>& s) {
  auto fact = factorials<S>(s.order());
  BorelSeries<S> b;
  b.coeffs.reserve(s.coeffs().size());
  for (int n = 0; n <= s.order(); ++n) b.coeffs.push_back(s.coeff(n) / fact[n]);
  return b;
}

template <SeriesScalar S>
TruncatedSeries<S> inverse_borel(const BorelSeries<S>& b, const S& constant_term) {
  if (b.coeffs.empty()) fail(ErrorCode::DomainError, "empty Borel series");
  auto fact = factorials<S>(b.order());
  std::vector<S> a;
  a.reserve(b.coeffs.size());
  for (int n = 0; n <= b.order(); ++n) a.push_back(b.coeffs[n] * fact[n]);
  return TruncatedSeries<S>(constant_term, std::move(a));
}

/// Product of two series truncated at the smaller order.
template <SeriesScalar S>
TruncatedSeries<S> cauchy_product(const TruncatedSeries<S>& s1, const TruncatedSeries<S>& s2) {
  const int N = std::min(s1.order(), s2.order());
  TruncatedSeries<S> r(N);
  r.constant() = s1.constant() * s2.constant();
  const bool c1 = s1.has_constant_term(), c2 = s2.has_constant_term();
  for (int n = 0; n <= N; ++n) {
    S acc = ScalarTraits<S>::zero();
    if (c1) acc += s1.constant() * s2.coeff(n);
    if (c2) acc += s2.constant() * s1.coeff(n);
    // z^{-p-1} z^{-q-1} = z^{-(p+q+1)-1}
    for (int p = 0; p + 1 <= n; ++p) {
      const int q = n - 1 - p;
      if (ScalarTraits<S>::is_zero(s1.coeff(p)) || ScalarTraits<S>::is_zero(s2.coeff(q))) continue;
      acc += s1.coeff(p) * s2.coeff(q);
    }
    r.coeff(n) = std::move(acc);
  }
  return r;
}

/// Formal convolution of Borel images, zeta^p/p! ... computed directly on b coefficients.
template <SeriesScalar S>
BorelSeries<S> formal_convolution(const BorelSeries<S>& b1, const BorelSeries<S>& b2) {
  const int N = std::min(b1.order(), b2.order());
  auto fact = factorials<S>(N);
  BorelSeries<S> r;
  r.coeffs.assign(static_cast<std::size_t>(N) + 1, ScalarTraits<S>::zero());
  for (int n = 1; n <= N; ++n) {
    S acc = ScalarTraits<S>::zero();
    for (int p = 0; p <= n - 1; ++p) {
      const int q = n - 1 - p;
      acc += b1.coeffs[p] * b2.coeffs[q] * fact[p] * fact[q];
    }
    r.coeffs[n] = acc / fact[n];
  }
  return r;
}

/// d/dz. Coefficient m of the result is -m a_{m-1}; it is exact for every m <= N, so order N is kept.
template <SeriesScalar S>
TruncatedSeries<S> derive(const TruncatedSeries<S>& s) {
  TruncatedSeries<S> r(s.order());
  for (int m = 1; m <= s.order(); ++m) r.coeff(m) = -(ScalarTraits<S>::from_int(m) * s.coeff(m - 1));
  return r;
}

/// Multiplication of a Borel germ by -zeta.
template <SeriesScalar S>
BorelSeries<S> multiply_by_minus_zeta(const BorelSeries<S>& b) {
  BorelSeries<S> r;
  r.coeffs.assign(b.coeffs.size(), ScalarTraits<S>::zero());
  for (int m = 1; m <= b.order(); ++m) r.coeffs[m] = -b.coeffs[m - 1];
  return r;
}

/// s^k, with s^0 the constant series 1.
template <SeriesScalar S>
TruncatedSeries<S> power(const TruncatedSeries<S>& s, int k) {
  if (k < 0) fail(ErrorCode::DomainError, "negative power of a formal series");
  TruncatedSeries<S> r = TruncatedSeries<S>::constant_series(ScalarTraits<S>::one(), s.order());
  for (int i = 0; i < k; ++i) r = cauchy_product(r, s);
  return r;
}

/// Convert between scalar modes.
inline FloatSeries to_float(const ExactSeries& s) {
  std::vector<cplx> a;
  a.reserve(s.coeffs().size());
  for (const auto& c : s.coeffs()) a.push_back(ScalarTraits<ExactComplex>::to_cplx(c));
  return FloatSeries(ScalarTraits<ExactComplex>::to_cplx(s.constant()), std::move(a));
}

inline ExactSeries to_exact(const FloatSeries& s) {
  std::vector<ExactComplex> a;
  a.reserve(s.coeffs().size());
  for (const auto& c : s.coeffs()) a.push_back(exact_from_double(c));
  return ExactSeries(exact_from_double(s.constant()), std::move(a));
}

template <SeriesScalar S>
std::vector<cplx> to_cplx_vector(const std::vector<S>& v) {
  std::vector<cplx> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(ScalarTraits<S>::to_cplx(x));
  return out;
}

}  // namespace resurgence
