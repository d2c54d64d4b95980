#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "series_json.hpp"

namespace resurgence {

/// Outcome of one inequality check lhs <= rhs, possibly aggregated over many samples.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  std::size_t samples = 1;
  std::size_t violations = 0;
  std::string note;

  /// rhs / lhs; infinite when lhs is 0.
  double margin() const {
    if (lhs == 0.0) return rhs >= 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return rhs / lhs;
  }

  static Check leq(std::string name, double lhs, double rhs, std::string note = {}) {
    Check c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.pass = lhs <= rhs;
    c.violations = c.pass ? 0 : 1;
    c.note = std::move(note);
    return c;
  }

  json to_json() const {
    auto num = [](double x) -> json {
      if (std::isfinite(x)) return x;
      return nullptr;
    };
    json j{{"name", name}, {"lhs", num(lhs)}, {"rhs", num(rhs)}, {"margin", num(margin())},
           {"pass", pass}, {"samples", samples}, {"violations", violations}};
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

/// Running aggregate of lhs <= rhs over samples; keeps the sample with the smallest margin.
class CheckAccumulator {
 public:
  explicit CheckAccumulator(std::string name, std::string note = {}) {
    check_.name = std::move(name);
    check_.note = std::move(note);
    check_.samples = 0;
  }

  void add(double lhs, double rhs) {
    const bool ok = lhs <= rhs;
    ++check_.samples;
    if (!ok) ++check_.violations;
    const double m = lhs == 0.0 ? std::numeric_limits<double>::infinity() : rhs / lhs;
    if (check_.samples == 1 || m < worst_) {
      worst_ = m;
      check_.lhs = lhs;
      check_.rhs = rhs;
    }
  }

  Check result() const {
    Check c = check_;
    c.pass = c.violations == 0;
    return c;
  }

 private:
  Check check_;
  double worst_ = std::numeric_limits<double>::infinity();
};

struct Report {
  std::string title;
  std::vector<Check> checks;
  json extra = json::object();

  void add(Check c) { checks.push_back(std::move(c)); }
  void add(const CheckAccumulator& a) { checks.push_back(a.result()); }
  void append(const Report& other) {
    for (const auto& c : other.checks) checks.push_back(c);
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::size_t violations() const {
    std::size_t v = 0;
    for (const auto& c : checks) v += c.violations;
    return v;
  }
  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(c.to_json());
    json j{{"title", title}, {"pass", all_pass()}, {"checks", arr}};
    if (!extra.empty()) j["extra"] = extra;
    return j;
  }
};

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace resurgence
