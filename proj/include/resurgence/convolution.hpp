#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iterator>
#include <memory>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "germ.hpp"
#include "omega.hpp"
#include "quadrature.hpp"
#include "report.hpp"

namespace resurgence {

struct ConvolutionValue {
  cplx value;
  double error_estimate = 0.0;
  /// Gauss points per axis of the accepted rule.
  int points_per_axis = 0;
};

namespace detail {

/// Runs `body(k)` for k in [0, count) on up to `jobs` threads. Each index is handled exactly once,
/// and results are expected to be written to per-index slots, so the outcome does not depend on jobs.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= count) return;
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Integral over the standard simplex of dimension `dim`, doubling the Gauss rule until two
/// consecutive values agree within tol.
template <class F>
ConvolutionValue adaptive_simplex_integral(int dim, F&& f, double tol, int start_points = 8) {
  if (dim == 0) return {f(std::vector<double>{}), 0.0, 0};
  auto integrate = [&](int p) {
    const SimplexRule r = simplex_rule(dim, p);
    cplx acc = 0.0;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) acc += r.weights[q] * f(r.nodes[q]);
    return acc;
  };
  int p = start_points;
  cplx prev = integrate(p);
  while (true) {
    p *= 2;
    if (std::pow(double(p), dim) > 4e6)
      fail(ErrorCode::ToleranceNotMet, "nested Gauss rule did not reach the requested tolerance");
    const cplx cur = integrate(p);
    const double diff = std::abs(cur - prev);
    if (diff <= tol) return {cur, diff, p};
    prev = cur;
  }
}

inline void check_principal_segment(const std::vector<GermPtr>& germs, cplx zeta, const OmegaSet* omega) {
  if (germs.empty()) fail(ErrorCode::DomainError, "at least one germ is required");
  if (omega && segment_blocked(zeta, *omega)) fail(ErrorCode::PathBlocked, "segment [0, zeta] meets Omega");
  for (const auto& g : germs) {
    try {
      g->check_segment(cplx(0.0, 0.0), zeta);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularityOnPath) fail(ErrorCode::PathBlocked, e.what());
      throw;
    }
  }
}

}  // namespace detail

/// phi_1 * ... * phi_n (zeta) on the principal sheet, by nested Gauss quadrature over the simplex.
inline ConvolutionValue principal_convolution(const std::vector<GermPtr>& germs, cplx zeta, double tol,
                                              const OmegaSet* omega = nullptr) {
  detail::check_principal_segment(germs, zeta, omega);
  const int n = static_cast<int>(germs.size());
  const cplx scale = std::pow(zeta, n - 1);
  return detail::adaptive_simplex_integral(
      n - 1,
      [&](const std::vector<double>& u) {
        cplx prod = scale;
        double rest = 1.0;
        for (int j = 0; j + 1 < n; ++j) {
          prod *= germs[j]->eval_principal(u[j] * zeta);
          rest -= u[j];
        }
        return prod * germs[n - 1]->eval_principal(rest * zeta);
      },
      tol);
}

/// 1 * phi_1 * ... * phi_n (zeta) on the principal sheet.
inline ConvolutionValue unit_prepend_convolution(const std::vector<GermPtr>& germs, cplx zeta, double tol,
                                                 const OmegaSet* omega = nullptr) {
  detail::check_principal_segment(germs, zeta, omega);
  const int n = static_cast<int>(germs.size());
  const cplx scale = std::pow(zeta, n);
  return detail::adaptive_simplex_integral(
      n,
      [&](const std::vector<double>& s) {
        cplx prod = scale;
        for (int j = 0; j < n; ++j) prod *= germs[j]->eval_principal(s[j] * zeta);
        return prod;
      },
      tol);
}

/// A path split into its initial segment [0, gamma(a)] and the tail along which the flow runs.
struct IsotopyPath {
  cplx gamma_a;
  /// Polyline from gamma(a) to the endpoint, parametrized by arc length.
  std::vector<cplx> tail;
  /// min over the tail of dist(gamma(t), Omega).
  double delta = 0.0;
  /// Arc length of the whole path.
  double total_length = 0.0;

  double tail_length() const {
    double l = 0.0;
    for (std::size_t k = 1; k < tail.size(); ++k) l += std::abs(tail[k] - tail[k - 1]);
    return l;
  }
  cplx endpoint() const { return tail.back(); }
};

/// Splits off the initial segment so that gamma(a) lies in the punctured disc of radius
/// start_fraction * rho on the first segment, and measures delta along the tail.
inline IsotopyPath prepare_isotopy_path(const SurfacePath& p, const OmegaSet& omega, double start_fraction = 0.45) {
  if (!(start_fraction > 0.0 && start_fraction < 0.5)) fail(ErrorCode::DomainError, "start fraction must lie in (0, 1/2)");
  const auto& v = p.vertices();
  if (v.size() < 2) fail(ErrorCode::InvalidPath, "path has no segment");
  if (p.max_modulus() > omega.radius()) fail(ErrorCode::RadiusExceeded, "path leaves the enumerated window of Omega");
  IsotopyPath out;
  out.total_length = p.arc_length();
  const double first = std::abs(v[1]);
  const double la = std::min(first, start_fraction * omega.rho());
  out.gamma_a = v[1] * (la / first);
  out.tail.push_back(out.gamma_a);
  if (la < first) out.tail.push_back(v[1]);
  for (std::size_t k = 2; k < v.size(); ++k) out.tail.push_back(v[k]);
  double d = std::abs(out.gamma_a);
  for (std::size_t k = 1; k < out.tail.size(); ++k)
    for (const auto& w : omega.points()) d = std::min(d, segment_point_distance(out.tail[k - 1], out.tail[k], w));
  if (!(d > omega.touch_tolerance())) fail(ErrorCode::PathBlocked, "path runs through a point of Omega");
  out.delta = d;
  return out;
}

struct FlowOptions {
  /// Bound on the Richardson estimate of the local error of one step.
  double step_tol = 1e-10;
  /// Upper bound on the step, in units of delta.
  double max_step_fraction = 0.25;
  /// Co-integrate central finite-difference variations to obtain the Jacobian.
  bool jacobian = false;
  double fd_spacing = 1e-5;
  /// Keep every accepted step.
  bool record = false;
  /// Track winding numbers of each component about the points of Omega.
  bool windings = false;
};

struct FlowSample {
  /// Flow time measured from a.
  double t = 0.0;
  std::vector<cplx> xi;
  double D = 0.0;
  /// det of the Jacobian at this time (when co-integrated).
  cplx det = 0.0;
};

/// Result of flowing one simplex node from time a to time b.
struct FlowNode {
  std::vector<double> s;
  std::vector<cplx> xi_a, xi;
  /// Jacobian d xi_i / d s_j at time b, row-major, when requested.
  std::vector<cplx> jac;
  std::vector<FlowSample> samples;
  std::vector<double> length;
  double min_D = std::numeric_limits<double>::infinity();
  /// max over accepted steps of |gamma(t) - sum xi_i|.
  double max_sum_residual = 0.0;
  std::size_t steps = 0, rejected = 0;
  /// Branch of each germ at xi (empty when no germs were given).
  std::vector<std::shared_ptr<const GermTracker>> trackers;
  std::vector<SheetData> sheets;
};

/// Vector field X_i = eta(xi_i)/D * gamma'(t), D = eta(gamma(t) - sum xi) + sum eta(xi_i).
inline double flow_field(const OmegaSet& omega, cplx gamma_t, cplx tangent, const cplx* xi, std::size_t n, cplx* out) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += xi[i];
  double D = omega.eta(gamma_t - sum);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = xi[i] == cplx(0.0) ? 0.0 : omega.eta(xi[i]);
    out[i] = e;
    D += e;
  }
  if (!(D > 0.0)) fail(ErrorCode::DeltaViolated, "flow denominator vanished");
  for (std::size_t i = 0; i < n; ++i) out[i] = out[i].real() / D * tangent;
  return D;
}

/// Flows the node s (a point of the simplex) along the tail; germs, when given, are continued along
/// each component trajectory.
inline FlowNode integrate_isotopy(const IsotopyPath& path, const OmegaSet& omega, const std::vector<double>& s,
                                  const std::vector<GermPtr>* germs = nullptr, const FlowOptions& opt = {}) {
  const std::size_t n = s.size();
  if (n == 0) fail(ErrorCode::DomainError, "flow needs at least one component");
  if (germs && germs->size() != n) fail(ErrorCode::DomainError, "one germ per component is required");
  const std::size_t members = opt.jacobian ? 1 + 2 * n : 1;
  const double fd = opt.fd_spacing;
  std::vector<cplx> y(members * n);
  for (std::size_t m = 0; m < members; ++m)
    for (std::size_t i = 0; i < n; ++i) {
      double si = s[i];
      if (m > 0) {
        const std::size_t j = (m - 1) / 2;
        if (j == i) si += ((m - 1) % 2 == 0 ? fd : -fd);
      }
      y[m * n + i] = si * path.gamma_a;
    }

  FlowNode out;
  out.s = s;
  out.xi_a.assign(y.begin(), y.begin() + n);
  out.length.assign(n, 0.0);
  std::vector<std::unique_ptr<GermTracker>> trackers;
  if (germs) {
    for (std::size_t i = 0; i < n; ++i) {
      trackers.push_back((*germs)[i]->tracker());
      if (out.xi_a[i] != cplx(0.0)) trackers.back()->advance(out.xi_a[i]);
    }
  }
  std::vector<SheetTracker> sheets;
  if (opt.windings)
    for (std::size_t i = 0; i < n; ++i) {
      sheets.emplace_back(omega);
      if (out.xi_a[i] != cplx(0.0)) sheets.back().advance(out.xi_a[i]);
    }

  auto jacobian_of = [&](const std::vector<cplx>& state) {
    std::vector<cplx> J(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        J[i * n + j] = (state[(1 + 2 * j) * n + i] - state[(2 + 2 * j) * n + i]) / (2.0 * fd);
    return J;
  };

  std::vector<cplx> k1(members * n), tmp(members * n);
  // Returns D of the base member.
  auto field = [&](cplx g, cplx e, const std::vector<cplx>& state, std::vector<cplx>& f) {
    double D0 = 0.0;
    for (std::size_t m = 0; m < members; ++m) {
      const double D = flow_field(omega, g, e, state.data() + m * n, n, f.data() + m * n);
      if (m == 0) D0 = D;
    }
    return D0;
  };
  auto midpoint = [&](cplx P, cplx e, double tau, const std::vector<cplx>& state, double h) {
    field(P + tau * e, e, state, k1);
    for (std::size_t k = 0; k < state.size(); ++k) tmp[k] = state[k] + 0.5 * h * k1[k];
    std::vector<cplx> f(state.size());
    field(P + (tau + 0.5 * h) * e, e, tmp, f);
    std::vector<cplx> next(state.size());
    for (std::size_t k = 0; k < state.size(); ++k) next[k] = state[k] + h * f[k];
    return next;
  };

  const double delta = path.delta;
  const double hmax = opt.max_step_fraction * delta;
  const double hmin = 1e-13 * std::max(1.0, path.total_length);
  double t_offset = 0.0;
  auto record = [&](double t, const std::vector<cplx>& state, double D) {
    if (!opt.record) return;
    FlowSample smp;
    smp.t = t;
    smp.xi.assign(state.begin(), state.begin() + n);
    smp.D = D;
    if (opt.jacobian) smp.det = complex_determinant(jacobian_of(state), n);
    out.samples.push_back(std::move(smp));
  };
  {
    std::vector<cplx> f(members * n);
    const double D = field(path.gamma_a, cplx(1.0, 0.0), y, f);
    out.min_D = D;
    record(0.0, y, D);
  }

  double h = hmax;
  for (std::size_t seg = 1; seg < path.tail.size(); ++seg) {
    const cplx P = path.tail[seg - 1];
    const double len = std::abs(path.tail[seg] - P);
    if (len == 0.0) continue;
    const cplx e = (path.tail[seg] - P) / len;
    double tau = 0.0;
    while (tau < len) {
      h = std::min({h, hmax, len - tau});
      const auto y1 = midpoint(P, e, tau, y, h);
      const auto yh = midpoint(P, e, tau, y, 0.5 * h);
      const auto y2 = midpoint(P, e, tau + 0.5 * h, yh, 0.5 * h);
      double err = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) err = std::max(err, std::abs(y2[k] - y1[k]));
      if (err > opt.step_tol && h > hmin) {
        ++out.rejected;
        h = std::max(hmin, h * std::max(0.1, 0.9 * std::cbrt(opt.step_tol / err)));
        continue;
      }
      if (err > opt.step_tol) fail(ErrorCode::StepUnderflow, "flow step fell below the minimum");
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = y2[k] + (y2[k] - y1[k]) / 3.0;
      tau = std::min(len, tau + h);
      ++out.steps;
      const cplx g = P + tau * e;
      std::vector<cplx> f(members * n);
      const double D = field(g, e, y, f);
      if (D < delta * (1.0 - 1e-9))
        fail(ErrorCode::DeltaViolated, "flow denominator " + std::to_string(D) + " fell below delta " + std::to_string(delta));
      out.min_D = std::min(out.min_D, D);
      cplx sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += y[i];
      out.max_sum_residual = std::max(out.max_sum_residual, std::abs(g - sum));
      for (std::size_t i = 0; i < n; ++i) {
        if (!trackers.empty() && y[i] != trackers[i]->position()) trackers[i]->advance(y[i]);
        if (!sheets.empty() && y[i] != sheets[i].current()) sheets[i].advance(y[i]);
      }
      record(t_offset + tau, y, D);
      if (err > 0.0) h = std::min(hmax, h * std::min(2.0, 0.9 * std::cbrt(opt.step_tol / err)));
      else h = hmax;
    }
    t_offset += len;
  }

  out.xi.assign(y.begin(), y.begin() + n);
  if (opt.jacobian) out.jac = jacobian_of(y);
  for (auto& t : trackers) out.trackers.emplace_back(std::move(t));
  for (const auto& sh : sheets) out.sheets.push_back(sh.classify());
  if (opt.record)
    for (std::size_t k = 1; k < out.samples.size(); ++k)
      for (std::size_t i = 0; i < n; ++i) out.length[i] += std::abs(out.samples[k].xi[i] - out.samples[k - 1].xi[i]);
  return out;
}

/// Writes rows (node_id, t, i, re, im, D) for recorded flows.
inline void write_trajectory_csv(std::ostream& os, const std::vector<FlowNode>& nodes) {
  os << "node_id,t,i,re,im,D\n";
  os.precision(17);
  for (std::size_t id = 0; id < nodes.size(); ++id)
    for (const auto& smp : nodes[id].samples)
      for (std::size_t i = 0; i < smp.xi.size(); ++i)
        os << id << ',' << smp.t << ',' << i + 1 << ',' << smp.xi[i].real() << ',' << smp.xi[i].imag() << ',' << smp.D << '\n';
}

/// Quadrature nodes on the simplex for the tensor route.
struct SimplexGrid {
  int n = 0;
  int level = 0;
  SimplexRule rule;

  static int points_for_level(int level) { return 4 << std::max(0, level); }
  static SimplexGrid make(int n, int level) {
    if (n < 1 || n > 5) fail(ErrorCode::DomainError, "simplex grids support 1 <= n <= 5");
    return {n, level, simplex_rule(n, points_for_level(level))};
  }
  double weight_sum() const {
    double s = 0.0;
    for (double w : rule.weights) s += w;
    return s;
  }
};

struct ContinuationOptions {
  enum class Method { Simplicial, Tensor };
  Method method = Method::Simplicial;
  /// Simplicial: initial lattice spacing 1/2^level before adaptive bisection.
  /// Tensor: 4*2^level Gauss points per axis, compared with half as many.
  int level = 2;
  /// Gauss points per axis inside each piece (simplicial route); compared with two more.
  int piece_points = 6;
  /// A piece is accepted when, in every component, it lies within this fraction of the distance
  /// from its first vertex to the singular points of the germ branch there.
  double piece_ratio = 0.3;
  /// Also integrate with half the piece ratio and include the difference in the error estimate.
  bool refinement_check = false;
  /// Cap on the number of pieces of the adaptive subdivision.
  std::size_t max_pieces = 2000000;
  double tol = 1e-6;
  int jobs = 1;
  FlowOptions flow;
  /// Raise ToleranceNotMet when the refinement difference exceeds tol.
  bool enforce_tolerance = true;
  double start_fraction = 0.45;
};

struct ContinuationResult {
  cplx value;
  cplx coarse_value;
  double error_estimate = 0.0;
  std::size_t flow_nodes = 0;
  std::size_t pieces = 0;
  double seconds = 0.0;
  IsotopyPath path;
};

namespace detail {

inline cplx branch_value(const GermTracker& t, cplx z) {
  if (z == t.position()) return t.value();
  auto c = t.clone();
  c->advance(z);
  return c->value();
}

/// Vertices of the lattice simplices of the subdivided standard simplex, as lattice coordinates
/// k (k_i >= 0, sum k_i <= m), together with the orientation sign of each piece.
struct LatticePiece {
  std::vector<std::vector<int>> vertices;
  int sign;
};

inline std::vector<LatticePiece> lattice_pieces(int n, int m) {
  // In cumulative coordinates u_j = s_1 + ... + s_j the simplex is 0 <= u_1 <= ... <= u_n <= 1, a
  // single Kuhn simplex; its Freudenthal subdivision consists of the cube simplices
  // c, c + e_p1, c + e_p1 + e_p2, ... whose vertices all stay ordered.
  std::vector<LatticePiece> out;
  std::vector<int> c(n, 0);
  std::vector<int> perm(n);
  auto ordered = [&](const std::vector<int>& u) {
    for (int j = 0; j + 1 < n; ++j)
      if (u[j] > u[j + 1]) return false;
    return u[n - 1] <= m && u[0] >= 0;
  };
  auto to_k = [&](const std::vector<int>& u) {
    std::vector<int> k(n);
    for (int j = 0; j < n; ++j) k[j] = u[j] - (j ? u[j - 1] : 0);
    return k;
  };
  while (true) {
    bool mono = true;
    for (int j = 0; j + 1 < n; ++j)
      if (c[j] > c[j + 1]) mono = false;
    if (mono) {
      for (int j = 0; j < n; ++j) perm[j] = j;
      do {
        std::vector<std::vector<int>> verts;
        std::vector<int> u = c;
        bool ok = ordered(u);
        verts.push_back(u);
        for (int k = 0; k < n && ok; ++k) {
          ++u[perm[k]];
          ok = ordered(u);
          verts.push_back(u);
        }
        if (ok) {
          int inversions = 0;
          for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
              if (perm[a] > perm[b]) ++inversions;
          LatticePiece piece;
          piece.sign = inversions % 2 ? -1 : 1;
          for (const auto& v : verts) piece.vertices.push_back(to_k(v));
          out.push_back(std::move(piece));
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    int j = n - 1;
    while (j >= 0 && ++c[j] == m) c[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

inline std::uint64_t lattice_key(const std::vector<int>& k, int m) {
  std::uint64_t key = 0;
  for (int v : k) key = key * static_cast<std::uint64_t>(m + 1) + static_cast<std::uint64_t>(v);
  return key;
}

}  // namespace detail

namespace detail {

/// Piecewise-affine approximation of the flowed simplex. The holomorphic n-form
/// phi_1(xi_1)...phi_n(xi_n) dxi_1...dxi_n is closed and vanishes on the faces {xi_j = 0} and
/// {sum xi = gamma(b)}, so its integral over any chain homotopic to the flowed simplex with
/// boundary in those faces gives the same value. The chain used here is affine on each piece
/// with vertices at flowed nodes; pieces are bisected until each lies inside discs of analyticity
/// of the germ branches, and each affine piece is integrated by a Gauss product rule.
class SimplicialIntegrator {
 public:
  SimplicialIntegrator(const std::vector<GermPtr>& germs, const IsotopyPath& ip, const OmegaSet& omega,
                       const ContinuationOptions& opt)
      : germs_(germs), ip_(ip), omega_(omega), opt_(opt), n_(germs.size()) {
    flow_ = opt.flow;
    flow_.jacobian = false;
    flow_.record = false;
    const int m = 1 << std::max(0, opt.level);
    for (const auto& piece : lattice_pieces(static_cast<int>(n_), m)) {
      Piece p;
      p.sign = piece.sign;
      p.tag = n_;
      for (const auto& k : piece.vertices) {
        std::vector<double> sv(n_);
        for (std::size_t i = 0; i < n_; ++i) sv[i] = double(k[i]) / m;
        p.v.push_back(std::move(sv));
      }
      initial_.push_back(std::move(p));
    }
  }

  /// Integral with the fine and the coarse per-piece rule.
  std::pair<cplx, cplx> run(double ratio) {
    Mesh mesh(initial_);
    std::set<int> accepted;
    while (true) {
      std::vector<Piece> leaves;
      std::vector<int> ids;
      for (const auto& [id, p] : mesh.leaves)
        if (!accepted.count(id)) {
          ids.push_back(id);
          leaves.push_back(p);
        }
      ensure_nodes(leaves);
      std::vector<int> marked;
      for (std::size_t q = 0; q < ids.size(); ++q) {
        if (small_enough(leaves[q], ratio))
          accepted.insert(ids[q]);
        else
          marked.push_back(ids[q]);
      }
      if (marked.empty()) break;
      for (int id : marked) mesh.refine(id);
      if (mesh.leaves.size() > opt_.max_pieces)
        fail(ErrorCode::GridTooCoarse, "adaptive subdivision exceeded the piece budget");
    }
    std::vector<const Piece*> done;
    for (const auto& [id, p] : mesh.leaves) done.push_back(&p);
    pieces_ = done.size();
    const SimplexRule fine = simplex_rule(static_cast<int>(n_), opt_.piece_points + 2);
    const SimplexRule coarse = simplex_rule(static_cast<int>(n_), opt_.piece_points);
    std::vector<cplx> pf(done.size()), pc(done.size());
    parallel_for(done.size(), opt_.jobs, [&](std::size_t q) {
      pf[q] = integrate_piece(*done[q], fine);
      pc[q] = integrate_piece(*done[q], coarse);
    });
    cplx f = 0.0, c = 0.0;
    for (std::size_t q = 0; q < done.size(); ++q) {
      f += pf[q];
      c += pc[q];
    }
    return {f, c};
  }

  std::size_t node_count() const { return nodes_.size(); }
  /// Largest deviation of a node on the face sum s = 1 from sum xi = gamma(t).
  double max_sum_residual() const {
    double r = 0.0;
    for (const auto& nd : nodes_) {
      double total = 0.0;
      for (double x : nd.s) total += x;
      if (total == 1.0) r = std::max(r, nd.max_sum_residual);
    }
    return r;
  }
  std::size_t piece_count() const { return pieces_; }

 private:
  struct Piece {
    std::vector<std::vector<double>> v;
    int sign = 1;
    /// Newest-vertex bisection tag: the refinement edge is (v[0], v[tag]).
    std::size_t tag = 0;
  };

  /// Conforming newest-vertex bisection of a Kuhn triangulation. Each bisection also bisects
  /// every leaf sharing the refinement edge, so no hanging vertices appear and the piecewise
  /// affine chain has no cracks.
  struct Mesh {
    std::map<int, Piece> leaves;
    std::map<std::vector<double>, std::set<int>> by_vertex;
    int next_id = 0;

    explicit Mesh(const std::vector<Piece>& init) {
      for (const auto& p : init) insert(p);
    }
    void insert(Piece p) {
      const int id = next_id++;
      for (const auto& x : p.v) by_vertex[x].insert(id);
      leaves.emplace(id, std::move(p));
    }
    void erase(int id) {
      for (const auto& x : leaves.at(id).v) by_vertex[x].erase(id);
      leaves.erase(id);
    }
    static std::pair<std::vector<double>, std::vector<double>> edge(const Piece& p) {
      auto a = p.v[0], b = p.v[p.tag];
      if (b < a) std::swap(a, b);
      return {a, b};
    }
    void bisect(int id) {
      Piece p = leaves.at(id);
      erase(id);
      const std::size_t n = p.v.size() - 1, k = p.tag;
      std::vector<double> z(p.v[0].size());
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * (p.v[0][i] + p.v[k][i]);
      Piece c1, c2;
      c1.tag = c2.tag = k > 1 ? k - 1 : n;
      for (std::size_t j = 0; j <= n; ++j) c1.v.push_back(j == k ? z : p.v[j]);
      for (std::size_t j = 1; j <= k; ++j) c2.v.push_back(p.v[j]);
      c2.v.push_back(z);
      for (std::size_t j = k + 1; j <= n; ++j) c2.v.push_back(p.v[j]);
      insert(std::move(c1));
      insert(std::move(c2));
    }
    void refine(int id, int depth = 0) {
      if (depth > 200) fail(ErrorCode::GridTooCoarse, "bisection closure did not terminate");
      while (leaves.count(id)) {
        const auto e = edge(leaves.at(id));
        std::vector<int> patch;
        const auto& sa = by_vertex[e.first];
        const auto& sb = by_vertex[e.second];
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(patch));
        int coarser = -1;
        for (int q : patch)
          if (edge(leaves.at(q)) != e) {
            coarser = q;
            break;
          }
        if (coarser < 0) {
          for (int q : patch) bisect(q);
          return;
        }
        refine(coarser, depth + 1);
      }
    }
  };

  const FlowNode& node(const std::vector<double>& s) const { return nodes_.at(index_.at(s)); }

  void ensure_nodes(const std::vector<Piece>& pieces) {
    std::vector<std::vector<double>> todo;
    for (const auto& p : pieces)
      for (const auto& s : p.v)
        if (!index_.count(s)) {
          index_[s] = nodes_.size() + todo.size();
          todo.push_back(s);
        }
    const std::size_t base = nodes_.size();
    nodes_.resize(base + todo.size());
    parallel_for(todo.size(), opt_.jobs, [&](std::size_t q) {
      nodes_[base + q] = integrate_isotopy(ip_, omega_, todo[q], &germs_, flow_);
    });
  }

  /// True when every component of the piece lies in a disc of analyticity of its germ branch.
  bool small_enough(const Piece& p, double ratio) const {
    const FlowNode& base = node(p.v[0]);
    for (std::size_t i = 0; i < n_; ++i) {
      double c = germs_[i]->singular_distance(base.xi[i]);
      if (!base.trackers[i]->on_principal_branch()) c = std::min(c, std::abs(base.xi[i]));
      for (std::size_t k = 1; k <= n_; ++k)
        if (!(std::abs(node(p.v[k]).xi[i] - base.xi[i]) <= ratio * c)) return false;
    }
    return true;
  }

  cplx integrate_piece(const Piece& p, const SimplexRule& rule) const {
    std::vector<const FlowNode*> v;
    for (const auto& s : p.v) v.push_back(&node(s));
    const FlowNode& base = *v[0];
    std::vector<cplx> E(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) E[i * n_ + k] = v[k + 1]->xi[i] - base.xi[i];
    // Orientation of the piece in s-space.
    std::vector<cplx> W(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) W[i * n_ + k] = p.v[k + 1][i] - p.v[0][i];
    const double sw = complex_determinant(W, n_).real();
    if (sw == 0.0) return 0.0;
    cplx acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      cplx prod = rule.weights[q];
      for (std::size_t i = 0; i < n_; ++i) {
        cplx zi = base.xi[i];
        for (std::size_t k = 0; k < n_; ++k) zi += rule.nodes[q][k] * E[i * n_ + k];
        prod *= branch_value(*base.trackers[i], zi);
      }
      acc += prod;
    }
    return (sw > 0.0 ? 1.0 : -1.0) * complex_determinant(E, n_) * acc;
  }

  const std::vector<GermPtr>& germs_;
  const IsotopyPath& ip_;
  const OmegaSet& omega_;
  const ContinuationOptions& opt_;
  std::size_t n_;
  FlowOptions flow_;
  std::vector<Piece> initial_;
  std::vector<FlowNode> nodes_;
  std::map<std::vector<double>, std::size_t> index_;
  std::size_t pieces_ = 0;
};

}  // namespace detail

/// (1 * phi_1 * ... * phi_n) at the endpoint of gamma on its sheet, by flowing the simplex
/// gamma(a) Delta_n along the tail and integrating the product of germ branches over the image.
inline ContinuationResult continued_convolution(const std::vector<GermPtr>& germs, const SurfacePath& gamma,
                                                const OmegaSet& omega, const ContinuationOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = germs.size();
  if (n < 1 || n > 5) fail(ErrorCode::DomainError, "continued convolution supports 1 <= n <= 5");
  ContinuationResult res;
  res.path = prepare_isotopy_path(gamma, omega, opt.start_fraction);
  const IsotopyPath& ip = res.path;

  if (opt.method == ContinuationOptions::Method::Tensor) {
    FlowOptions fo = opt.flow;
    fo.jacobian = true;
    auto integrate = [&](int level) {
      const SimplexGrid grid = SimplexGrid::make(static_cast<int>(n), level);
      std::vector<cplx> parts(grid.rule.nodes.size());
      detail::parallel_for(parts.size(), opt.jobs, [&](std::size_t q) {
        FlowNode node = integrate_isotopy(ip, omega, grid.rule.nodes[q], &germs, fo);
        cplx prod = complex_determinant(node.jac, n);
        for (std::size_t i = 0; i < n; ++i) prod *= node.trackers[i]->value();
        parts[q] = grid.rule.weights[q] * prod;
      });
      cplx acc = 0.0;
      for (const auto& p : parts) acc += p;
      res.flow_nodes += parts.size();
      return acc;
    };
    res.value = integrate(opt.level);
    res.coarse_value = integrate(opt.level - 1);
    res.error_estimate = std::abs(res.value - res.coarse_value);
  } else {
    detail::SimplicialIntegrator integ(germs, ip, omega, opt);
    const auto fine = integ.run(opt.piece_ratio);
    res.value = fine.first;
    res.coarse_value = fine.second;
    if (opt.refinement_check) {
      const auto finer = integ.run(0.5 * opt.piece_ratio);
      res.coarse_value = res.value;
      res.value = finer.first;
      res.error_estimate = std::max(std::abs(finer.first - finer.second), std::abs(finer.first - fine.first));
    } else {
      res.error_estimate = std::abs(res.value - res.coarse_value);
    }
    // Vertices off the top face by r move the chain boundary; the value changes by about r|value|.
    res.error_estimate += integ.max_sum_residual() * (1.0 + std::abs(res.value));
    res.flow_nodes = integ.node_count();
    res.pieces = integ.piece_count();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.enforce_tolerance && res.error_estimate > opt.tol)
    fail(ErrorCode::ToleranceNotMet, "refinement difference " + std::to_string(res.error_estimate) + " exceeds tol " +
                                         std::to_string(opt.tol));
  return res;
}

/// Derivative at z0 of a field holomorphic on the disc |z - z0| <= radius, by the trapezoidal rule
/// applied to the Cauchy integral on the circle.
inline cplx deconvolve_unit(const std::function<cplx(cplx)>& field, cplx z0, double radius, int points = 32) {
  if (!(radius > 0.0) || points < 4) fail(ErrorCode::DomainError, "need radius > 0 and at least 4 points");
  cplx acc = 0.0;
  for (int j = 0; j < points; ++j) {
    const cplx w = std::polar(1.0, 2.0 * std::numbers::pi * j / points);
    acc += field(z0 + radius * w) / w;
  }
  return acc / (double(points) * radius);
}

/// phi_1 * ... * phi_n at the endpoint of gamma, from the continued unit-prepended product on a
/// circle of radius delta/2 around the endpoint.
inline cplx continued_germ_convolution(const std::vector<GermPtr>& germs, const SurfacePath& gamma, const OmegaSet& omega,
                                       const ContinuationOptions& opt = {}, int points = 16) {
  const IsotopyPath ip = prepare_isotopy_path(gamma, omega, opt.start_fraction);
  const double r = 0.5 * ip.delta;
  return deconvolve_unit([&](cplx z) { return continued_convolution(germs, gamma.then(z), omega, opt).value; },
                         gamma.endpoint(), r, points);
}

struct FlowCheckOptions {
  /// Multiplicative slack on the eta sandwich, as a multiple of L/delta in the exponent.
  double eta_slack_rate = 0.05;
  /// Multiple of the step tolerance allowed for the sum-constraint residual.
  double sum_residual_factor = 10.0;
  double step_tol = 1e-10;
  /// Random nearby pairs per recorded sample for the Lipschitz estimate of X.
  int lipschitz_pairs = 2;
  /// How many nodes get a K-membership witness check of their endpoint components.
  std::size_t witness_nodes = 8;
  unsigned seed = 1;
};

/// Verifies the flow estimates on recorded runs (record and jacobian enabled).
inline Report check_flow_estimates(const IsotopyPath& ip, const OmegaSet& omega, const std::vector<FlowNode>& nodes,
                                   const FlowCheckOptions& opt = {}) {
  Report rep;
  rep.title = "flow estimates";
  if (nodes.empty()) return rep;
  const std::size_t n = nodes[0].s.size();
  const double L = ip.tail_length();
  const double delta = ip.delta;
  const double rho = omega.rho();
  const double slack = std::exp(opt.eta_slack_rate * L / delta);

  CheckAccumulator zero_face("zero_face_components_exact", "max |xi_j| over nodes with s_j = 0");
  CheckAccumulator sum_face("sum_constraint_residual", "|gamma(t) - S_n| on nodes with sum s = 1");
  CheckAccumulator dlow("denominator_at_least_delta", "delta <= D(t)");
  CheckAccumulator eta_up("eta_sandwich_upper", "eta(xi_t) <= e^{(t-a)/delta} eta(xi_a), with discretization slack");
  CheckAccumulator eta_low("eta_sandwich_lower", "e^{-(t-a)/delta} eta(xi_a) <= eta(xi_t), with discretization slack");
  CheckAccumulator det_bound("jacobian_determinant_bound", "|det d xi/d s| <= (rho e^{3L/delta})^n");
  CheckAccumulator det_start("jacobian_at_start", "|det| at t = a equals |gamma(a)|^n <= rho^n");
  CheckAccumulator len_bound("component_length_at_most_tail_length");
  CheckAccumulator disc_bound("components_stay_in_disc_of_radius_path_length");
  CheckAccumulator lip("field_lipschitz_estimate", "sum |X_i(z') - X_i(z)| <= 3/D(z') sum |z'_i - z_i|");
  CheckAccumulator kmem("endpoint_components_in_K", "witness path certifies R_Omega >= delta' along length <= L");

  const double det_rhs = std::pow(rho * std::exp(3.0 * L / delta), double(n));
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& node : nodes) {
    double ssum = 0.0;
    for (double v : node.s) ssum += v;
    const bool on_sum_face = std::abs(ssum - 1.0) <= 1e-14;
    if (on_sum_face) sum_face.add(node.max_sum_residual, opt.sum_residual_factor * opt.step_tol);
    if (!node.samples.empty()) det_start.add(std::abs(node.samples.front().det), std::pow(rho, double(n)));
    for (std::size_t i = 0; i < n; ++i) len_bound.add(node.length[i], L * (1.0 + 1e-9) + 1e-12);
    for (const auto& smp : node.samples) {
      dlow.add(delta * (1.0 - 1e-9), smp.D);
      det_bound.add(std::abs(smp.det), det_rhs);
      for (std::size_t i = 0; i < n; ++i) {
        if (node.s[i] == 0.0) zero_face.add(std::abs(smp.xi[i]), 0.0);
        disc_bound.add(std::abs(smp.xi[i]), ip.total_length * (1.0 + 1e-9));
        const double ea = omega.eta(node.xi_a[i]);
        const double et = smp.xi[i] == cplx(0.0) ? 0.0 : omega.eta(smp.xi[i]);
        const double g = std::exp(smp.t / delta);
        eta_up.add(et, g * ea * slack);
        eta_low.add(ea / (g * slack), et);
      }
    }
    // Lipschitz estimate of the field on random nearby pairs around recorded states.
    for (std::size_t k = 0; k < node.samples.size(); k += std::max<std::size_t>(1, node.samples.size() / 8)) {
      const auto& smp = node.samples[k];
      // Position on the tail at time smp.t.
      double t = smp.t;
      cplx g = ip.tail.back(), e = 1.0;
      for (std::size_t seg = 1; seg < ip.tail.size(); ++seg) {
        const double len = std::abs(ip.tail[seg] - ip.tail[seg - 1]);
        if (len == 0.0) continue;
        e = (ip.tail[seg] - ip.tail[seg - 1]) / len;
        if (t <= len) {
          g = ip.tail[seg - 1] + t * e;
          break;
        }
        t -= len;
      }
      for (int r = 0; r < opt.lipschitz_pairs; ++r) {
        std::vector<cplx> z1 = smp.xi, z2 = smp.xi, X1(n), X2(n);
        double dz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (z1[i] == cplx(0.0)) continue;
          z2[i] += 1e-3 * delta * cplx(unif(rng), unif(rng));
          dz += std::abs(z2[i] - z1[i]);
        }
        flow_field(omega, g, e, z1.data(), n, X1.data());
        const double D2 = flow_field(omega, g, e, z2.data(), n, X2.data());
        double dX = 0.0;
        for (std::size_t i = 0; i < n; ++i) dX += std::abs(X2[i] - X1[i]);
        lip.add(dX, 3.0 / D2 * dz * (1.0 + 1e-9) + 1e-15);
      }
    }
  }
  // K-membership of endpoint components for a spread of nodes.
  const double dprime = 0.5 * rho * std::exp(-2.0 * L / delta);
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / std::max<std::size_t>(1, opt.witness_nodes));
  for (std::size_t q = 0; q < nodes.size(); q += stride) {
    const auto& node = nodes[q];
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<cplx> verts{cplx(0.0, 0.0)};
      for (const auto& smp : node.samples) verts.push_back(smp.xi[i]);
      AdmissibilityWitness w{SurfacePath(verts), dprime, ip.total_length, {}, 0.0};
      const bool ok = check_kdl_membership(w, omega);
      kmem.add(ok ? 0.0 : 1.0, 0.0);
    }
  }
  for (const auto* acc : {&zero_face, &sum_face, &dlow, &eta_up, &eta_low, &det_bound, &det_start, &len_bound, &disc_bound, &lip, &kmem})
    rep.add(*acc);
  rep.extra = {{"delta", delta}, {"L", L}, {"rho", rho}, {"n", n}, {"nodes", nodes.size()}, {"eta_slack", slack}};
  return rep;
}

}  // namespace resurgence
