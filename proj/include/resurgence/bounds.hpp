#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "convolution.hpp"
#include "germ.hpp"
#include "omega.hpp"
#include "report.hpp"

namespace resurgence {

/// Sampling plan for lower estimates of max |phi| over K_{delta,L}(Omega).
struct KMaxOptions {
  int fan_angles = 72;
  int fan_radii = 40;
  /// Points placed just outside the disc of radius delta around each reachable nonzero omega.
  int near_omega_angles = 48;
  /// Random two-segment detours.
  int detours = 300;
  unsigned seed = 1;
};

struct KMaxEstimate {
  double value = 0.0;
  std::size_t samples = 0;
  cplx argmax = 0.0;
  bool argmax_principal = true;
};

namespace detail {

inline bool in_k(const SurfacePath& p, const OmegaSet& omega, double delta, double L) {
  AdmissibilityWitness w{p, delta, L, {}, 0.0};
  return check_kdl_membership(w, omega);
}

/// Candidate paths for K_{delta,L}: radial fan, radial approaches to every nonzero omega, and
/// random two-segment detours. Only paths passing the membership test are returned.
inline std::vector<SurfacePath> k_sample_paths(const OmegaSet& omega, double delta, double L, const KMaxOptions& opt) {
  std::vector<SurfacePath> out;
  const double pi = std::numbers::pi;
  auto try_add = [&](std::vector<cplx> v) {
    SurfacePath p(std::move(v));
    if (in_k(p, omega, delta, L)) out.push_back(std::move(p));
  };
  for (int a = 0; a < opt.fan_angles; ++a)
    for (int r = 1; r <= opt.fan_radii; ++r)
      try_add({0.0, std::polar(L * r / opt.fan_radii, 2.0 * pi * a / opt.fan_angles)});
  for (const cplx w : omega.points()) {
    if (w == cplx(0.0) || std::abs(w) - delta > L) continue;
    const cplx u = w / std::abs(w);
    const double step = 2.0 * pi / opt.near_omega_angles;
    for (int a = 0; a < opt.near_omega_angles; ++a) {
      const cplx z = w + u * std::polar(delta * (1.0 + 1e-3), step * a);
      try_add({0.0, z});
      // Walk around omega on a polygon of radius 2 delta, starting on the side facing 0, in both
      // senses, and then step in to z; this reaches the sheets adjacent through omega.
      for (int sense : {1, -1}) {
        std::vector<cplx> v{0.0};
        const int start = opt.near_omega_angles / 2;
        for (int j = 0;; ++j) {
          const int idx = start + sense * j;
          v.push_back(w + u * std::polar(2.0 * delta, step * idx));
          if (((idx % opt.near_omega_angles) + opt.near_omega_angles) % opt.near_omega_angles == a && j > 0) break;
          if (j > opt.near_omega_angles) break;
        }
        v.push_back(z);
        try_add(std::move(v));
      }
    }
  }
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < opt.detours; ++k) {
    const double l1 = L * u(rng), l2 = (L - l1) * u(rng);
    const cplx w1 = std::polar(l1, 2.0 * pi * u(rng));
    const cplx w2 = w1 + std::polar(l2, 2.0 * pi * u(rng));
    try_add({0.0, w1, w2});
  }
  return out;
}

}  // namespace detail

/// Lower estimate of max |phi| over K_{delta,L}(Omega) by the sampling plan above. Germ values
/// off the principal sheet come from continuation along the sampled path.
inline KMaxEstimate estimate_k_max(const Germ& g, const OmegaSet& omega, double delta, double L,
                                   const KMaxOptions& opt = {}) {
  KMaxEstimate est;
  for (const auto& p : detail::k_sample_paths(omega, delta, L, opt)) {
    cplx v;
    try {
      v = g.continue_along(p);
    } catch (const Error&) {
      continue;
    }
    ++est.samples;
    if (std::abs(v) > est.value) {
      est.value = std::abs(v);
      est.argmax = p.endpoint();
      est.argmax_principal = is_principal_sheet(p, omega);
    }
  }
  return est;
}

/// Witness paths in K_{delta,L}(Omega): a deterministic mix of fan points and random detours.
inline std::vector<SurfacePath> sample_k_witnesses(const OmegaSet& omega, double delta, double L, std::size_t count,
                                                   unsigned seed = 1) {
  std::vector<SurfacePath> out;
  const double pi = std::numbers::pi;
  const std::size_t fan = (count + 1) / 2;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; out.size() < fan && k < 50 * count; ++k) {
    // Golden-angle spiral over the disc of radius L.
    const double r = L * std::sqrt((k + 0.5) / double(fan));
    if (r > L) break;
    SurfacePath p({0.0, std::polar(r, 2.399963229728653 * k)});
    if (detail::in_k(p, omega, delta, L)) out.push_back(std::move(p));
  }
  for (std::size_t k = 0; out.size() < count && k < 200 * count; ++k) {
    const double l1 = L * u(rng), l2 = (L - l1) * u(rng);
    const cplx w1 = std::polar(l1, 2.0 * pi * u(rng));
    SurfacePath p({0.0, w1, w1 + std::polar(l2, 2.0 * pi * u(rng))});
    if (detail::in_k(p, omega, delta, L)) out.push_back(std::move(p));
  }
  return out;
}

struct BoundOptions {
  double delta = 0.3;
  double L = 1.5;
  std::size_t witnesses = 60;
  unsigned seed = 1;
  /// Absolute tolerance of the principal-sheet quadrature for the left-hand sides.
  double tol = 1e-7;
  KMaxOptions kmax;
  /// Settings for witnesses off the principal sheet (continued convolution).
  ContinuationOptions continuation;
  /// Witnesses off the principal sheet are evaluated only for n up to this value.
  std::size_t max_continued_factors = 2;
};

namespace detail {

inline double factorial(std::size_t n) { return std::tgamma(double(n) + 1.0); }

inline std::string germ_list(const std::vector<GermPtr>& germs) {
  std::string s;
  for (const auto& g : germs) s += (s.empty() ? "" : ",") + g->name();
  return s;
}

/// Shared driver: evaluates lhs(witness) for every witness and compares with a single rhs.
template <class Lhs>
Report bound_report(const std::string& title, const std::vector<GermPtr>& germs, const OmegaSet& omega,
                    const BoundOptions& opt, double rhs, const std::string& check_name, Lhs&& lhs, json extra) {
  Report rep;
  rep.title = title;
  CheckAccumulator acc(check_name, germ_list(germs));
  std::size_t principal = 0, continued = 0, skipped = 0;
  for (const auto& w : sample_k_witnesses(omega, opt.delta, opt.L, opt.witnesses, opt.seed)) {
    const bool pr = is_principal_sheet(w, omega);
    if (!pr && germs.size() > opt.max_continued_factors) {
      ++skipped;
      continue;
    }
    acc.add(lhs(w, pr), rhs);
    ++(pr ? principal : continued);
  }
  rep.add(acc);
  extra["witnesses_principal"] = principal;
  extra["witnesses_continued"] = continued;
  extra["witnesses_skipped"] = skipped;
  extra["germs"] = germ_list(germs);
  extra["n"] = germs.size();
  rep.extra = std::move(extra);
  return rep;
}

}  // namespace detail

/// max_K |1 * phi_1 * ... * phi_n| <= (rho e^{3L/delta})^n / n! * prod max_{K_{delta',L}} |phi_j|.
inline Report check_unit_prepended_bound(const std::vector<GermPtr>& germs, const OmegaSet& omega,
                                        const BoundOptions& opt = {}) {
  const std::size_t n = germs.size();
  const auto k = unit_prepended_bound_constants(opt.delta, opt.L, omega.rho());
  double rhs = std::pow(k.factor, double(n)) / detail::factorial(n);
  json extra{{"delta", opt.delta}, {"L", opt.L}, {"rho", omega.rho()}, {"delta_prime", k.delta_prime},
             {"factor", k.factor}};
  json maxima = json::array();
  for (const auto& g : germs) {
    const auto m = estimate_k_max(*g, omega, k.delta_prime, opt.L, opt.kmax);
    rhs *= m.value;
    maxima.push_back({{"germ", g->name()}, {"max", m.value}, {"samples", m.samples}});
  }
  extra["maxima"] = maxima;
  return detail::bound_report(
      "unit-prepended convolution bound", germs, omega, opt, rhs, "unit_prepended_bound",
      [&](const SurfacePath& w, bool principal) {
        if (principal) return std::abs(unit_prepend_convolution(germs, w.endpoint(), opt.tol).value);
        return std::abs(continued_convolution(germs, w, omega, opt.continuation).value);
      },
      std::move(extra));
}

/// max_K |phi_1 * ... * phi_n| <= (2/delta) C^n / n! * prod max_{K_{delta',L'}} |phi_j|.
inline Report check_convolution_bound(const std::vector<GermPtr>& germs, const OmegaSet& omega,
                                   const BoundOptions& opt = {}) {
  const std::size_t n = germs.size();
  const auto k = convolution_bound_constants(opt.delta, opt.L, omega.rho());
  double rhs = 2.0 / opt.delta * std::pow(k.C, double(n)) / detail::factorial(n);
  json extra{{"delta", opt.delta}, {"L", opt.L}, {"rho", omega.rho()}, {"C", k.C}, {"delta_prime", k.delta_prime},
             {"L_prime", k.L_prime}};
  json maxima = json::array();
  for (const auto& g : germs) {
    const auto m = estimate_k_max(*g, omega, k.delta_prime, k.L_prime, opt.kmax);
    rhs *= m.value;
    maxima.push_back({{"germ", g->name()}, {"max", m.value}, {"samples", m.samples}});
  }
  extra["maxima"] = maxima;
  return detail::bound_report(
      "convolution bound", germs, omega, opt, rhs, "convolution_bound",
      [&](const SurfacePath& w, bool principal) {
        if (principal) return std::abs(principal_convolution(germs, w.endpoint(), opt.tol).value);
        return std::abs(continued_germ_convolution(germs, w, omega, opt.continuation));
      },
      std::move(extra));
}

/// On the principal sheet: |phi_1 * ... * phi_n(zeta)| <= |zeta|^{n-1}/(n-1)! prod max_{[0,zeta]} |phi_j|.
/// Segment maxima are sampled at `segment_points` points; the comparison allows the quadrature
/// tolerance plus a relative 1e-9 because the bound is attained for constant germs.
inline Report check_principal_sheet_bound(const std::vector<GermPtr>& germs, const OmegaSet& omega,
                                          const BoundOptions& opt = {}, int segment_points = 512) {
  const std::size_t n = germs.size();
  Report rep;
  rep.title = "principal-sheet convolution bound";
  CheckAccumulator acc("principal_sheet_bound", detail::germ_list(germs));
  for (const auto& w : sample_k_witnesses(omega, opt.delta, opt.L, opt.witnesses, opt.seed)) {
    if (!is_principal_sheet(w, omega)) continue;
    const cplx z = w.endpoint();
    double rhs = std::pow(std::abs(z), double(n) - 1.0) / detail::factorial(n - 1);
    for (const auto& g : germs) {
      double m = 0.0;
      for (int k = 0; k <= segment_points; ++k) m = std::max(m, std::abs(g->eval_principal(z * (double(k) / segment_points))));
      rhs *= m;
    }
    const double lhs = std::abs(principal_convolution(germs, z, opt.tol).value);
    acc.add(lhs, rhs * (1.0 + 1e-9) + opt.tol);
  }
  rep.add(acc);
  rep.extra = {{"germs", detail::germ_list(germs)}, {"n", n}};
  return rep;
}

/// All multisets of size n drawn from the given germs.
inline std::vector<std::vector<GermPtr>> germ_multisets(const std::vector<GermPtr>& pool, std::size_t n) {
  std::vector<std::vector<GermPtr>> out;
  std::vector<std::size_t> idx(n, 0);
  if (n == 0 || pool.empty()) return out;
  while (true) {
    std::vector<GermPtr> g;
    for (auto i : idx) g.push_back(pool[i]);
    out.push_back(std::move(g));
    std::size_t k = n;
    while (k > 0 && idx[k - 1] == pool.size() - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < n; ++j) idx[j] = idx[k - 1];
  }
  return out;
}

}  // namespace resurgence
