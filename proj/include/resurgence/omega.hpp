#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "scalar.hpp"

namespace resurgence {

/// Closed discrete addition-stable set containing 0, enumerated inside a disc.
class OmegaSet {
 public:
  /// Hard cap on the number of enumerated points.
  static constexpr std::size_t max_points = 200000;

  OmegaSet(std::vector<cplx> generators, double radius) : generators_(std::move(generators)), radius_(radius) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) fail(ErrorCode::DomainError, "enumeration radius must be positive");
    if (generators_.empty()) fail(ErrorCode::DomainError, "at least one generator is required");
    double gmax = 0.0, gmin = std::numeric_limits<double>::infinity();
    for (auto g : generators_) {
      if (!(std::abs(g) > 0.0) || !std::isfinite(std::abs(g))) fail(ErrorCode::DomainError, "generators must be nonzero and finite");
      gmax = std::max(gmax, std::abs(g));
      gmin = std::min(gmin, std::abs(g));
    }
    enumerate(gmax, gmin);
  }

  const std::vector<cplx>& generators() const { return generators_; }
  double radius() const { return radius_; }
  /// All enumerated points, 0 first.
  const std::vector<cplx>& points() const { return points_; }
  double rho() const { return rho_; }
  /// Distance below which a point counts as touching Omega.
  double touch_tolerance() const { return 1e-9 * rho_; }

  bool contains(cplx z) const {
    for (auto w : points_)
      if (std::abs(z - w) <= dedup_tol_) return true;
    return false;
  }

  /// dist(xi, Omega), valid when |xi| + dist <= radius.
  double eta(cplx xi) const { return checked_distance(xi, false); }

  /// dist(xi, Omega \ {0}).
  double eta_nonzero(cplx xi) const { return checked_distance(xi, true); }

  /// Nearest enumerated point (optionally excluding 0) without the radius check.
  std::pair<double, std::size_t> nearest(cplx xi, bool exclude_zero = false) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t k = exclude_zero ? 1 : 0; k < points_.size(); ++k) {
      const double d = std::abs(xi - points_[k]);
      if (d < best) {
        best = d;
        idx = k;
      }
    }
    return {best, idx};
  }

  static OmegaSet from_json(const nlohmann::json& j) {
    try {
      std::vector<cplx> gens;
      for (const auto& g : j.at("generators")) gens.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
      return OmegaSet(std::move(gens), j.at("radius").get<double>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, std::string("omega JSON: ") + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json g = nlohmann::json::array();
    for (auto z : generators_) g.push_back({z.real(), z.imag()});
    return {{"generators", g}, {"radius", radius_}};
  }

 private:
  double checked_distance(cplx xi, bool exclude_zero) const {
    const double d = nearest(xi, exclude_zero).first;
    if (!(std::abs(xi) + d <= radius_ * (1.0 + 1e-12)))
      fail(ErrorCode::RadiusExceeded, "query point at modulus " + std::to_string(std::abs(xi)) +
                                          " needs Omega beyond enumeration radius " + std::to_string(radius_));
    return d;
  }

  void enumerate(double gmax, double gmin) {
    dedup_tol_ = 1e-9 * gmin;
    const double search = 2.0 * radius_ + gmax;
    const double cell = std::max(dedup_tol_ * 16.0, 1e-300);
    auto key = [&](cplx z) { return std::pair<long long, long long>(std::llround(z.real() / cell), std::llround(z.imag() / cell)); };
    std::set<std::pair<long long, long long>> seen;
    std::vector<cplx> all{cplx(0.0, 0.0)};
    seen.insert(key(all[0]));
    std::deque<cplx> frontier{all[0]};
    auto known = [&](cplx z) {
      auto k = key(z);
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy)
          if (seen.count({k.first + dx, k.second + dy})) return true;
      return false;
    };
    while (!frontier.empty()) {
      const cplx p = frontier.front();
      frontier.pop_front();
      for (auto g : generators_) {
        const cplx s = p + g;
        if (std::abs(s) > search || known(s)) continue;
        seen.insert(key(s));
        all.push_back(s);
        frontier.push_back(s);
        if (all.size() > max_points) fail(ErrorCode::DomainError, "Omega enumeration exceeds the point cap; reduce the radius");
      }
    }
    points_.clear();
    for (auto z : all)
      if (std::abs(z) <= radius_) points_.push_back(z);
    std::stable_sort(points_.begin() + 1, points_.end(), [](cplx a, cplx b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
      return std::arg(a) < std::arg(b);
    });
    rho_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < points_.size(); ++k) rho_ = std::min(rho_, std::abs(points_[k]));
    if (!std::isfinite(rho_)) fail(ErrorCode::DomainError, "enumeration radius is smaller than every point of Omega");
    if (rho_ <= dedup_tol_) fail(ErrorCode::DomainError, "generators produce an accumulation near 0; Omega is not discrete");
  }

  std::vector<cplx> generators_;
  double radius_;
  std::vector<cplx> points_;
  double rho_ = 0.0;
  double dedup_tol_ = 0.0;
};

/// Distance from w to the segment [a, b].
inline double segment_point_distance(cplx a, cplx b, cplx w) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(w - a);
  const double t = std::clamp(((w - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(a + t * d - w);
}

/// Angle swept by the segment [a, b] seen from w, in (-pi, pi].
inline double swept_angle(cplx a, cplx b, cplx w) { return std::arg((b - w) / (a - w)); }

/// Polyline path starting at 0.
class SurfacePath {
 public:
  SurfacePath() : vertices_{cplx(0.0, 0.0)} {}
  explicit SurfacePath(std::vector<cplx> vertices) {
    if (vertices.empty() || std::abs(vertices.front()) != 0.0) fail(ErrorCode::InvalidPath, "a path must start at 0");
    vertices_.push_back(cplx(0.0, 0.0));
    for (std::size_t k = 1; k < vertices.size(); ++k) {
      if (!std::isfinite(vertices[k].real()) || !std::isfinite(vertices[k].imag()))
        fail(ErrorCode::InvalidPath, "non-finite vertex");
      if (std::abs(vertices[k] - vertices_.back()) > 0.0) vertices_.push_back(vertices[k]);
    }
    cumulative_.assign(1, 0.0);
    for (std::size_t k = 1; k < vertices_.size(); ++k)
      cumulative_.push_back(cumulative_.back() + std::abs(vertices_[k] - vertices_[k - 1]));
  }

  static SurfacePath segment(cplx end) { return SurfacePath({cplx(0.0, 0.0), end}); }

  const std::vector<cplx>& vertices() const { return vertices_; }
  std::size_t segments() const { return vertices_.size() - 1; }
  cplx endpoint() const { return vertices_.back(); }
  double arc_length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double max_modulus() const {
    double m = 0.0;
    for (auto v : vertices_) m = std::max(m, std::abs(v));
    return m;
  }
  /// Arc length at each vertex.
  const std::vector<double>& cumulative_length() const { return cumulative_; }

  /// Point at arc length s (clamped to [0, length]).
  cplx at_length(double s) const {
    if (segments() == 0) return vertices_[0];
    s = std::clamp(s, 0.0, arc_length());
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cumulative_.begin())) ;
    if (k >= vertices_.size()) k = vertices_.size() - 1;
    const double seg = cumulative_[k] - cumulative_[k - 1];
    const double t = seg > 0 ? (s - cumulative_[k - 1]) / seg : 0.0;
    return vertices_[k - 1] + t * (vertices_[k] - vertices_[k - 1]);
  }

  /// Unit tangent of segment k (1-based on the vertex list: segment k joins vertex k-1 and k).
  cplx tangent(std::size_t k) const {
    const cplx d = vertices_[k] - vertices_[k - 1];
    return d / std::abs(d);
  }

  SurfacePath then(cplx next) const {
    auto v = vertices_;
    v.push_back(next);
    return SurfacePath(std::move(v));
  }

  /// Smallest distance from the path to Omega, the origin only counted away from the start.
  double clearance(const OmegaSet& omega) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < vertices_.size(); ++k) {
      const cplx a = vertices_[k - 1], b = vertices_[k];
      for (std::size_t j = 0; j < omega.points().size(); ++j) {
        const cplx w = omega.points()[j];
        if (j == 0 && k == 1) continue;  // leaving the origin along a ray never returns to it
        best = std::min(best, segment_point_distance(a, b, w));
      }
    }
    return best;
  }

  /// Throws unless the path stays inside the enumerated window and away from Omega off its start.
  void validate(const OmegaSet& omega, ErrorCode code = ErrorCode::InvalidPath) const {
    if (max_modulus() > omega.radius())
      fail(ErrorCode::RadiusExceeded, "path leaves the enumerated window of Omega");
    if (clearance(omega) <= omega.touch_tolerance())
      fail(code, "path passes within tolerance of a point of Omega");
  }

  static SurfacePath from_csv(std::istream& in) {
    std::vector<cplx> v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double re, im;
      if (!(ls >> re >> im)) fail(ErrorCode::ParseError, "path CSV line " + std::to_string(lineno) + " is not 're,im'");
      v.emplace_back(re, im);
    }
    if (v.empty()) fail(ErrorCode::ParseError, "empty path CSV");
    return SurfacePath(std::move(v));
  }

  static SurfacePath from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open '" + path + "'");
    return from_csv(in);
  }

 private:
  std::vector<cplx> vertices_;
  std::vector<double> cumulative_;
};

/// Winding data of the loop formed by a path closed with the segment back to 0.
struct SheetData {
  bool principal = true;
  /// The straight segment to the endpoint meets Omega \ {0}.
  bool blocked = false;
  /// Winding number about each enumerated point of Omega (index 0, the origin, left at 0).
  std::vector<long> winding;
};

/// Accumulates angle sums along a path so every prefix can be classified.
class SheetTracker {
 public:
  explicit SheetTracker(const OmegaSet& omega) : omega_(&omega), angle_(omega.points().size(), 0.0) {}

  void advance(cplx to) {
    const double tol = omega_->touch_tolerance();
    const auto& pts = omega_->points();
    const bool first = (std::abs(current_) == 0.0);
    for (std::size_t j = first ? 1 : 0; j < pts.size(); ++j) {
      if (segment_point_distance(current_, to, pts[j]) <= tol)
        fail(ErrorCode::UndecidableNearOmega, "path passes within tolerance of a point of Omega");
      if (j == 0) continue;
      angle_[j] += swept_angle(current_, to, pts[j]);
    }
    current_ = to;
  }

  cplx current() const { return current_; }

  /// Classifies the prefix walked so far.
  SheetData classify() const {
    SheetData out;
    const auto& pts = omega_->points();
    out.winding.assign(pts.size(), 0);
    if (std::abs(current_) == 0.0) return out;
    const double tol = omega_->touch_tolerance();
    for (std::size_t j = 1; j < pts.size(); ++j) {
      double closing;
      if (segment_point_distance(current_, cplx(0.0, 0.0), pts[j]) <= tol) {
        // The segment [0, endpoint] runs through this point, so the endpoint is not on the
        // principal sheet. The closing segment is taken to pass it on the clockwise side.
        out.blocked = true;
        out.principal = false;
        closing = -std::numbers::pi;
      } else {
        closing = swept_angle(current_, cplx(0.0, 0.0), pts[j]);
      }
      const double total = angle_[j] + closing;
      out.winding[j] = std::lround(total / (2.0 * std::numbers::pi));
      if (out.winding[j] != 0) out.principal = false;
    }
    return out;
  }

 private:
  const OmegaSet* omega_;
  std::vector<double> angle_;
  cplx current_{0.0, 0.0};
};

inline SheetData sheet_data(const SurfacePath& p, const OmegaSet& omega) {
  if (p.max_modulus() > omega.radius()) fail(ErrorCode::RadiusExceeded, "path leaves the enumerated window of Omega");
  SheetTracker tr(omega);
  for (std::size_t k = 1; k < p.vertices().size(); ++k) tr.advance(p.vertices()[k]);
  return tr.classify();
}

/// True iff the path is homotopic to the segment [0, endpoint], tested by winding numbers.
inline bool is_principal_sheet(const SurfacePath& p, const OmegaSet& omega) { return sheet_data(p, omega).principal; }

/// True iff the straight segment [0, z] meets Omega \ {0} (within tolerance).
inline bool segment_blocked(cplx z, const OmegaSet& omega) {
  for (std::size_t j = 1; j < omega.points().size(); ++j)
    if (segment_point_distance(cplx(0.0, 0.0), z, omega.points()[j]) <= omega.touch_tolerance()) return true;
  return false;
}

inline double r_omega_at(cplx endpoint, bool principal, const OmegaSet& omega) {
  return principal ? omega.eta_nonzero(endpoint) : omega.eta(endpoint);
}

/// Distance from the endpoint to the closest possibly singular point.
inline double r_omega(const SurfacePath& p, const OmegaSet& omega) {
  return r_omega_at(p.endpoint(), is_principal_sheet(p, omega), omega);
}

struct AdmissibilityWitness {
  SurfacePath path;
  double delta = 0.0;
  double length_budget = 0.0;
  std::vector<double> vertex_r_omega;  // filled by check_kdl_membership
  double min_r_omega = 0.0;            // filled by check_kdl_membership
};

/// One-sided sufficient test for membership of the endpoint in K_{delta,L}.
inline bool check_kdl_membership(AdmissibilityWitness& w, const OmegaSet& omega) {
  const auto& v = w.path.vertices();
  w.vertex_r_omega.clear();
  w.min_r_omega = std::numeric_limits<double>::infinity();
  if (!(w.delta > 0.0) || !(w.length_budget > 0.0)) return false;
  if (w.path.arc_length() > w.length_budget * (1.0 + 1e-12)) return false;
  try {
    SheetTracker tr(omega);
    auto sample = [&](cplx x) {
      const double r = r_omega_at(x, tr.classify().principal, omega);
      w.min_r_omega = std::min(w.min_r_omega, r);
      return r;
    };
    w.vertex_r_omega.push_back(sample(v[0]));
    // R_Omega is 1-Lipschitz along the path, so a sample with value r certifies R_Omega >= delta
    // on the next r - delta of arc length.
    const double hmin = w.delta * 1e-6;
    double r = w.vertex_r_omega.back();
    for (std::size_t k = 1; k < v.size(); ++k) {
      const cplx a = v[k - 1], b = v[k];
      const double len = std::abs(b - a);
      double s = 0.0;
      while (s < len) {
        if (r - w.delta < hmin) return false;
        const double h = r - w.delta;
        s = std::min(len, s + h);
        const cplx x = a + (b - a) * (s / len);
        tr.advance(x);
        r = sample(x);
      }
      w.vertex_r_omega.push_back(r);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UndecidableNearOmega || e.code() == ErrorCode::RadiusExceeded) return false;
    throw;
  }
  return w.min_r_omega >= w.delta;
}

struct ConvolutionBoundConstants {
  double C;
  double delta_prime;
  double L_prime;
};

/// C = rho e^{3+6L/delta}, delta' = rho e^{-2-4L/delta}/2, L' = L + delta/2.
inline ConvolutionBoundConstants convolution_bound_constants(double delta, double L, double rho) {
  if (!(delta > 0.0) || !(L >= 0.0) || !(rho > 0.0)) fail(ErrorCode::DomainError, "need delta > 0, L >= 0, rho > 0");
  if (delta >= rho) fail(ErrorCode::DomainError, "need delta < rho");
  return {rho * std::exp(3.0 + 6.0 * L / delta), 0.5 * rho * std::exp(-2.0 - 4.0 * L / delta), L + 0.5 * delta};
}

struct UnitPrependedBoundConstants {
  /// Per-factor growth rho e^{3L/delta}; the bound is factor^n / n!.
  double factor;
  double delta_prime;
};

/// Constants of the refined bound with the unit prepended; requires delta < rho/2.
inline UnitPrependedBoundConstants unit_prepended_bound_constants(double delta, double L, double rho) {
  if (!(delta > 0.0) || !(L >= 0.0) || !(rho > 0.0)) fail(ErrorCode::DomainError, "need delta > 0, L >= 0, rho > 0");
  if (delta >= 0.5 * rho) fail(ErrorCode::DomainError, "need delta < rho/2");
  return {rho * std::exp(3.0 * L / delta), 0.5 * rho * std::exp(-2.0 * L / delta)};
}

}  // namespace resurgence
