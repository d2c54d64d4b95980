#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "series.hpp"

namespace resurgence {

using json = nlohmann::json;

namespace detail {

inline json integer_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return json(static_cast<std::int64_t>(z.get_si()));
  return json(z.get_str());
}

inline mpz_class integer_from_json(const json& j) {
  if (j.is_string()) {
    mpz_class z;
    if (z.set_str(j.get<std::string>(), 10) != 0) fail(ErrorCode::ParseError, "bad integer string");
    return z;
  }
  if (j.is_number_integer()) return mpz_class(std::to_string(j.get<std::int64_t>()));
  fail(ErrorCode::ParseError, "expected an integer or integer string");
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::ParseError, "complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json exact_to_json(const ExactComplex& z) {
  return json::array({integer_to_json(z.re.get_num()), integer_to_json(z.re.get_den()),
                      integer_to_json(z.im.get_num()), integer_to_json(z.im.get_den())});
}

inline ExactComplex exact_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCode::ParseError, "exact value must be [num_re, den_re, num_im, den_im]");
  Rational re(integer_from_json(j[0]), integer_from_json(j[1]));
  Rational im(integer_from_json(j[2]), integer_from_json(j[3]));
  if (re.get_den() == 0 || im.get_den() == 0) fail(ErrorCode::ParseError, "zero denominator");
  re.canonicalize();
  im.canonicalize();
  return {re, im};
}

}  // namespace detail

template <SeriesScalar S>
json series_to_json(const TruncatedSeries<S>& s) {
  json j;
  j["constant"] = detail::complex_to_json(ScalarTraits<S>::to_cplx(s.constant()));
  json coeffs = json::array();
  for (const auto& a : s.coeffs()) coeffs.push_back(detail::complex_to_json(ScalarTraits<S>::to_cplx(a)));
  j["coeffs"] = coeffs;
  j["mode"] = to_string(ScalarTraits<S>::mode);
  if constexpr (is_exact_v<S>) {
    json ex = json::array();
    for (const auto& a : s.coeffs()) ex.push_back(detail::exact_to_json(a));
    j["exact_coeffs"] = ex;
    j["exact_constant"] = detail::exact_to_json(s.constant());
  }
  return j;
}

/// A parsed series file in whichever mode it declared.
using AnySeries = std::variant<ExactSeries, FloatSeries>;

inline AnySeries series_from_json(const json& j) {
  try {
    const std::string mode = j.value("mode", std::string("float"));
    if (mode == "exact") {
      if (!j.contains("exact_coeffs")) {
        // Exact mode from float pairs: every double is an exact rational.
        const auto fs = series_from_json(json{{"constant", j.at("constant")}, {"coeffs", j.at("coeffs")}, {"mode", "float"}});
        return to_exact(std::get<FloatSeries>(fs));
      }
      std::vector<ExactComplex> a;
      for (const auto& e : j.at("exact_coeffs")) a.push_back(detail::exact_from_json(e));
      ExactComplex c = j.contains("exact_constant") ? detail::exact_from_json(j["exact_constant"])
                                                    : exact_from_double(detail::complex_from_json(j.at("constant")));
      return ExactSeries(std::move(c), std::move(a));
    }
    if (mode != "float") fail(ErrorCode::ParseError, "unknown series mode '" + mode + "'");
    std::vector<cplx> a;
    for (const auto& e : j.at("coeffs")) a.push_back(detail::complex_from_json(e));
    cplx c = j.contains("constant") ? detail::complex_from_json(j["constant"]) : cplx{};
    return FloatSeries(c, std::move(a));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("series JSON: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "'" + path + "': " + e.what());
  }
}

}  // namespace resurgence
