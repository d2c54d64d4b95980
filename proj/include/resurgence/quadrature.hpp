#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "scalar.hpp"

namespace resurgence {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> x, w;
};

inline GaussRule compute_gauss_legendre(int p) {
  if (p < 1) fail(ErrorCode::DomainError, "Gauss rule needs at least one node");
  GaussRule r;
  r.x.resize(p);
  r.w.resize(p);
  for (int i = 0; i < (p + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= p; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = p * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = 0.5 * (1.0 - z);
    r.x[p - 1 - i] = 0.5 * (1.0 + z);
    r.w[i] = r.w[p - 1 - i] = 0.5 * w;
  }
  return r;
}

/// Cached rule; safe to call from several threads.
inline const GaussRule& gauss_legendre(int p) {
  static std::mutex m;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, compute_gauss_legendre(p)).first;
  return it->second;
}

/// Product rule on the simplex {s_i >= 0, s_1 + ... + s_d <= 1}, obtained from the cube by the
/// collapsed map s_1 = x_1, s_k = (1 - x_1)...(1 - x_{k-1}) x_k. Weights sum to 1/d!.
struct SimplexRule {
  int dim = 0;
  int points_per_axis = 0;
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
};

inline SimplexRule simplex_rule(int dim, int p) {
  if (dim < 0) fail(ErrorCode::DomainError, "negative simplex dimension");
  SimplexRule r;
  r.dim = dim;
  r.points_per_axis = p;
  if (dim == 0) {
    r.nodes.push_back({});
    r.weights.push_back(1.0);
    return r;
  }
  const GaussRule& g = gauss_legendre(p);
  std::vector<int> idx(dim, 0);
  while (true) {
    std::vector<double> s(dim);
    double rest = 1.0, w = 1.0;
    for (int k = 0; k < dim; ++k) {
      s[k] = rest * g.x[idx[k]];
      w *= g.w[idx[k]] * rest;
      rest *= 1.0 - g.x[idx[k]];
    }
    r.nodes.push_back(std::move(s));
    r.weights.push_back(w);
    int k = dim - 1;
    while (k >= 0 && ++idx[k] == p) idx[k--] = 0;
    if (k < 0) break;
  }
  return r;
}

/// Determinant of a small complex matrix (row-major n x n) by partial pivoting.
inline cplx complex_determinant(std::vector<cplx> a, std::size_t n) {
  cplx det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == cplx(0.0)) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

}  // namespace resurgence
