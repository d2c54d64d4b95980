#pragma once

#include <complex>
#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>

#include <gmpxx.h>

namespace resurgence {

using cplx = std::complex<double>;
using Rational = mpq_class;

/// Complex number with arbitrary-precision rational parts.
struct ExactComplex {
  Rational re{0};
  Rational im{0};

  ExactComplex() = default;
  ExactComplex(long v) : re(v), im(0) {}  // NOLINT: implicit from integers is intended
  ExactComplex(Rational r) : re(std::move(r)), im(0) {}  // NOLINT
  ExactComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }

  ExactComplex& operator+=(const ExactComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ExactComplex& operator-=(const ExactComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  ExactComplex& operator*=(const ExactComplex& o) {
    if (sgn(im) == 0 && sgn(o.im) == 0) {
      re *= o.re;
      return *this;
    }
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  ExactComplex& operator/=(const ExactComplex& o) {
    if (sgn(o.im) == 0) {
      re /= o.re;
      im /= o.re;
      return *this;
    }
    Rational den = o.re * o.re + o.im * o.im;
    Rational r = (re * o.re + im * o.im) / den;
    Rational i = (im * o.re - re * o.im) / den;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }

  friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
  friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
  friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
  friend ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
  friend ExactComplex operator-(const ExactComplex& a) { return ExactComplex(-a.re, -a.im); }
  friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
    return a.re == b.re && a.im == b.im;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExactComplex& z) {
    os << z.re.get_str();
    if (sgn(z.im) != 0) os << (sgn(z.im) > 0 ? "+" : "") << z.im.get_str() << "i";
    return os;
  }
};

enum class ScalarMode { Exact, Float };

constexpr const char* to_string(ScalarMode m) { return m == ScalarMode::Exact ? "exact" : "float"; }

template <typename S>
struct ScalarTraits;

template <>
struct ScalarTraits<ExactComplex> {
  static constexpr ScalarMode mode = ScalarMode::Exact;
  static ExactComplex zero() { return {}; }
  static ExactComplex one() { return ExactComplex(1L); }
  static ExactComplex from_int(long long v) { return ExactComplex(Rational(mpz_class(std::to_string(v)))); }
  static ExactComplex ratio(long long num, long long den) {
    Rational q(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
    q.canonicalize();
    return ExactComplex(q);
  }
  static bool is_zero(const ExactComplex& z) { return z.is_zero(); }
  static cplx to_cplx(const ExactComplex& z) { return {z.re.get_d(), z.im.get_d()}; }
};

template <>
struct ScalarTraits<cplx> {
  static constexpr ScalarMode mode = ScalarMode::Float;
  static cplx zero() { return {0.0, 0.0}; }
  static cplx one() { return {1.0, 0.0}; }
  static cplx from_int(long long v) { return {static_cast<double>(v), 0.0}; }
  static cplx ratio(long long num, long long den) {
    return {static_cast<double>(num) / static_cast<double>(den), 0.0};
  }
  static bool is_zero(const cplx& z) { return z == cplx(0.0, 0.0); }
  static cplx to_cplx(const cplx& z) { return z; }
};

template <typename S>
concept SeriesScalar = requires { ScalarTraits<S>::mode; };

template <SeriesScalar S>
constexpr bool is_exact_v = ScalarTraits<S>::mode == ScalarMode::Exact;

inline ExactComplex exact_from_double(cplx z) {
  // mpq_class(double) is exact for every finite double
  return ExactComplex(Rational(z.real()), Rational(z.imag()));
}

}  // namespace resurgence
