#pragma once

#include <vector>

#include "series.hpp"

namespace resurgence {

/// Bernoulli numbers B_0..B_n (B_1 = -1/2) by the recurrence sum_{k<m+1} C(m+1,k) B_k = 0.
inline std::vector<Rational> bernoulli_numbers(int n) {
  std::vector<Rational> B(static_cast<std::size_t>(n) + 1);
  B[0] = 1;
  for (int m = 1; m <= n; ++m) {
    Rational acc = 0;
    mpz_class binom = 1;  // C(m+1, k)
    for (int k = 0; k < m; ++k) {
      acc += Rational(binom) * B[k];
      binom = binom * (m + 1 - k) / (k + 1);
    }
    B[m] = -acc / Rational(m + 1);
  }
  return B;
}

template <SeriesScalar S>
S scalar_from_rational(const Rational& q) {
  if constexpr (is_exact_v<S>) {
    return ExactComplex(q);
  } else {
    return cplx(q.get_d(), 0.0);
  }
}

/// Euler series sum (-1)^n n! z^{-n-1}.
template <SeriesScalar S>
TruncatedSeries<S> euler_series(int order) {
  TruncatedSeries<S> s(order);
  S f = ScalarTraits<S>::one();
  for (int n = 0; n <= order; ++n) {
    if (n > 0) f *= ScalarTraits<S>::from_int(n);
    s.coeff(n) = (n % 2 == 0) ? f : -f;
  }
  return s;
}

/// Stirling series: log Gamma(z) - (z-1/2) log z + z - log(2 pi)/2 ~ sum_k B_{2k}/(2k(2k-1)) z^{1-2k}.
/// In the z^{-n-1} basis this puts B_{2k}/(2k(2k-1)) at n = 2k-2.
template <SeriesScalar S>
TruncatedSeries<S> stirling_series(int order) {
  TruncatedSeries<S> s(order);
  auto B = bernoulli_numbers(order + 2);
  for (int n = 0; n <= order; n += 2) {
    const int k2 = n + 2;  // 2k
    s.coeff(n) = scalar_from_rational<S>(B[k2] / Rational(k2 * (k2 - 1)));
  }
  return s;
}

/// Geometric series with Borel image 1/(1 - zeta): a_n = n!.
template <SeriesScalar S>
TruncatedSeries<S> geometric_series(int order) {
  TruncatedSeries<S> s(order);
  S f = ScalarTraits<S>::one();
  for (int n = 0; n <= order; ++n) {
    if (n > 0) f *= ScalarTraits<S>::from_int(n);
    s.coeff(n) = f;
  }
  return s;
}

}  // namespace resurgence
