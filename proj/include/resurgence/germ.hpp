#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "known_series.hpp"
#include "omega.hpp"
#include "scalar.hpp"
#include "series.hpp"

namespace resurgence {

/// Distance below which a path counts as running through a singular point of a germ.
inline constexpr double singular_touch_tolerance = 1e-9;

/// State of one analytic continuation of a germ; moves along straight segments.
class GermTracker {
 public:
  virtual ~GermTracker() = default;
  /// Continue along the straight segment from the current position to `to`.
  virtual void advance(cplx to) = 0;
  /// Value of the tracked branch at the current position.
  virtual cplx value() const = 0;
  virtual cplx position() const = 0;
  /// True while the continuation is still on the branch seen from the origin.
  virtual bool on_principal_branch() const = 0;
  virtual std::unique_ptr<GermTracker> clone() const = 0;
};

class Germ {
 public:
  virtual ~Germ() = default;
  virtual std::string name() const = 0;
  /// Distance from z to the singular set of the germ (all branches).
  virtual double singular_distance(cplx z) const = 0;
  /// Convergence radius of the Taylor expansion at 0.
  virtual double origin_radius() const { return singular_distance(cplx(0.0, 0.0)); }
  /// Principal-branch value for |zeta| < origin_radius().
  cplx eval_at_origin_disc(cplx zeta) const {
    if (!(std::abs(zeta) < origin_radius()))
      fail(ErrorCode::OutOfDisc, name() + ": |zeta| = " + std::to_string(std::abs(zeta)) +
                                     " outside the disc of radius " + std::to_string(origin_radius()));
    return eval_principal(zeta);
  }
  /// Principal branch at points of the principal sheet (caller guarantees the segment [0, zeta] is admissible).
  virtual cplx eval_principal(cplx zeta) const = 0;
  /// New continuation sitting at the origin.
  virtual std::unique_ptr<GermTracker> tracker() const = 0;

  /// Value of the branch reached by continuing along the path.
  cplx continue_along(const SurfacePath& p) const {
    auto tr = tracker();
    for (std::size_t k = 1; k < p.vertices().size(); ++k) tr->advance(p.vertices()[k]);
    return tr->value();
  }

  /// Smallest distance from the segment [a, b] to the singular set (sampled; exact up to the touch tolerance).
  double segment_clearance(cplx a, cplx b) const {
    double best = std::min(singular_distance(a), singular_distance(b));
    const double len = std::abs(b - a);
    if (len == 0.0) return best;
    double s = 0.0;
    while (s < len) {
      const cplx x = a + (b - a) * (s / len);
      const double d = singular_distance(x);
      best = std::min(best, d);
      if (best <= singular_touch_tolerance) return best;
      s += std::max(d, singular_touch_tolerance);  // the disc of radius d around x is singularity free
    }
    return best;
  }

  void check_segment(cplx a, cplx b) const {
    if (segment_clearance(a, b) <= singular_touch_tolerance)
      fail(ErrorCode::SingularityOnPath, name() + ": path runs through a singular point near " +
                                             std::to_string(b.real()) + "," + std::to_string(b.imag()));
  }
};

using GermPtr = std::shared_ptr<const Germ>;

namespace detail {

inline double min_distance(cplx z, const std::vector<cplx>& pts) {
  double d = std::numeric_limits<double>::infinity();
  for (auto p : pts) d = std::min(d, std::abs(z - p));
  return d;
}

}  // namespace detail

/// Single-valued germ given by a meromorphic closed form.
class MeromorphicGerm : public Germ {
 public:
  using Eval = std::function<cplx(cplx)>;
  using Distance = std::function<double(cplx)>;

  MeromorphicGerm(std::string name, Eval f, Distance dist) : name_(std::move(name)), f_(std::move(f)), dist_(std::move(dist)) {}

  /// Germ with a finite list of poles.
  static std::shared_ptr<MeromorphicGerm> with_poles(std::string name, Eval f, std::vector<cplx> poles) {
    return std::make_shared<MeromorphicGerm>(std::move(name), std::move(f),
                                             [poles = std::move(poles)](cplx z) { return detail::min_distance(z, poles); });
  }

  std::string name() const override { return name_; }
  double singular_distance(cplx z) const override { return dist_(z); }
  cplx eval_principal(cplx zeta) const override { return f_(zeta); }

  std::unique_ptr<GermTracker> tracker() const override { return std::make_unique<Tracker>(this); }

 private:
  class Tracker : public GermTracker {
   public:
    explicit Tracker(const MeromorphicGerm* g) : g_(g) {}
    void advance(cplx to) override {
      g_->check_segment(pos_, to);
      pos_ = to;
    }
    cplx value() const override { return g_->f_(pos_); }
    cplx position() const override { return pos_; }
    bool on_principal_branch() const override { return true; }
    std::unique_ptr<GermTracker> clone() const override { return std::make_unique<Tracker>(*this); }

   private:
    const MeromorphicGerm* g_;
    cplx pos_{0.0, 0.0};
  };

  std::string name_;
  Eval f_;
  Distance dist_;
};

/// Germ with logarithmic branch points: the evaluator receives the integer winding offset of each
/// log(1 - zeta/omega_j) relative to its principal determination.
class LogBranchGerm : public Germ {
 public:
  using Eval = std::function<cplx(cplx, const std::vector<long>&)>;

  LogBranchGerm(std::string name, std::vector<cplx> branch_points, Eval f)
      : name_(std::move(name)), points_(std::move(branch_points)), f_(std::move(f)) {}

  std::string name() const override { return name_; }
  double singular_distance(cplx z) const override { return detail::min_distance(z, points_); }
  cplx eval_principal(cplx zeta) const override { return f_(zeta, std::vector<long>(points_.size(), 0)); }
  const std::vector<cplx>& branch_points() const { return points_; }

  class Tracker : public GermTracker {
   public:
    explicit Tracker(const LogBranchGerm* g) : g_(g), arg_(g->points_.size(), 0.0) {}
    void advance(cplx to) override {
      g_->check_segment(pos_, to);
      for (std::size_t j = 0; j < arg_.size(); ++j) {
        const cplx w = g_->points_[j];
        arg_[j] += std::arg((1.0 - to / w) / (1.0 - pos_ / w));
      }
      pos_ = to;
    }
    /// Integer offsets k_j with log(1 - zeta/omega_j) = Log(1 - zeta/omega_j) + 2 pi i k_j.
    std::vector<long> offsets() const {
      std::vector<long> k(arg_.size());
      for (std::size_t j = 0; j < arg_.size(); ++j) {
        const double principal = std::arg(1.0 - pos_ / g_->points_[j]);
        k[j] = std::lround((arg_[j] - principal) / (2.0 * std::numbers::pi));
      }
      return k;
    }
    cplx value() const override { return g_->f_(pos_, offsets()); }
    cplx position() const override { return pos_; }
    bool on_principal_branch() const override {
      for (long k : offsets())
        if (k != 0) return false;
      return true;
    }
    std::unique_ptr<GermTracker> clone() const override { return std::make_unique<Tracker>(*this); }

   private:
    const LogBranchGerm* g_;
    std::vector<double> arg_;
    cplx pos_{0.0, 0.0};
  };

  std::unique_ptr<GermTracker> tracker() const override { return std::make_unique<Tracker>(this); }

 private:
  std::string name_;
  std::vector<cplx> points_;
  Eval f_;
};

/// Germ known through Taylor coefficients at 0; continued by re-expansion on a chain of discs.
class TaylorGerm : public Germ {
 public:
  /// `singular` is the declared singular set; when empty, `radius` bounds the disc of validity.
  TaylorGerm(std::string name, std::vector<cplx> coeffs, std::vector<cplx> singular, double radius = 0.0)
      : name_(std::move(name)), coeffs_(std::move(coeffs)), singular_(std::move(singular)), radius_(radius) {
    if (coeffs_.empty()) fail(ErrorCode::DomainError, "Taylor germ needs coefficients");
    if (singular_.empty() && !(radius_ > 0.0)) radius_ = estimate_radius(coeffs_);
  }

  template <SeriesScalar S>
  static std::shared_ptr<TaylorGerm> from_borel(std::string name, const BorelSeries<S>& b, std::vector<cplx> singular,
                                                double radius = 0.0) {
    return std::make_shared<TaylorGerm>(std::move(name), to_cplx_vector(b.coeffs), std::move(singular), radius);
  }

  /// Root-test estimate of the convergence radius from the tail of the coefficients.
  static double estimate_radius(const std::vector<cplx>& c) {
    const int M = static_cast<int>(c.size()) - 1;
    double best = 0.0;
    for (int n = std::max(1, M / 2); n <= M; ++n) {
      const double a = std::abs(c[n]);
      if (a > 0.0) best = std::max(best, std::pow(a, 1.0 / n));
    }
    return best > 0.0 ? 1.0 / best : std::numeric_limits<double>::infinity();
  }

  std::string name() const override { return name_; }
  double singular_distance(cplx z) const override {
    if (!singular_.empty()) return detail::min_distance(z, singular_);
    return std::max(0.0, radius_ - std::abs(z));
  }
  cplx eval_principal(cplx zeta) const override {
    auto tr = tracker();
    tr->advance(zeta);
    return tr->value();
  }
  int stored_order() const { return static_cast<int>(coeffs_.size()) - 1; }

  /// Center displacement per re-expansion, in units of the local distance to the singular set.
  static constexpr double step_fraction = 1.0 / 3.0;
  /// Largest tracked value error, relative to max(1, |value|), before the chain is abandoned.
  double max_error() const { return max_error_; }
  void set_max_error(double e) { max_error_ = e; }

  /// Continuation on a chain of discs. At each center c the germ is represented by scaled
  /// coefficients alpha_k with f(c + s w) = sum alpha_k w^k, s = R(c)/3, where R(c) is the distance
  /// to the singular set. Moving the center uses the exact Taylor shift of the local polynomial.
  /// Each coefficient carries an absolute error bound, propagated through the shift together with a
  /// geometric model of the omitted tail. Coefficients whose bound exceeds their size are dropped,
  /// so the retained order never exceeds the stored order and shrinks as information is lost.
  class Tracker : public GermTracker {
   public:
    explicit Tracker(const TaylorGerm* g) : g_(g) {
      const double R = std::min(g->singular_distance(0.0), 3e6);
      if (!(R > 0.0)) fail(ErrorCode::DiscChainUnderflow, g->name_ + ": zero convergence radius");
      scale_ = R / 3.0;
      initial_radius_ = R;
      const std::size_t M = g->coeffs_.size();
      alpha_.resize(M);
      err_.resize(M);
      double p = 1.0;
      for (std::size_t k = 0; k < M; ++k, p *= scale_) {
        alpha_[k] = g->coeffs_[k] * p;
        err_[k] = 4.0 * eps * std::abs(alpha_[k]);
      }
      refresh_amplitude();
    }

    void advance(cplx to) override {
      g_->check_segment(pos_, to);
      int guard = 0;
      // March the centers along the segment itself, not along the chord from the current center.
      if (std::abs(to - center_) > step_fraction * radius() && pos_ != center_) recenter(pos_);
      while (std::abs(to - center_) > step_fraction * radius()) {
        const cplx dir = (to - center_) / std::abs(to - center_);
        recenter(center_ + dir * (step_fraction * radius()));
        if (++guard > max_steps) fail(ErrorCode::DiscChainUnderflow, g_->name_ + ": too many re-expansions");
      }
      pos_ = to;
      if (error_estimate() > g_->max_error_ * std::max(1.0, std::abs(value())))
        fail(ErrorCode::DiscChainUnderflow, g_->name_ + ": tracked error " + std::to_string(error_estimate()) +
                                                " exceeds " + std::to_string(g_->max_error_));
    }

    cplx value() const override {
      const cplx w = (pos_ - center_) / scale_;
      cplx acc = 0.0;
      for (std::size_t k = alpha_.size(); k-- > 0;) acc = acc * w + alpha_[k];
      return acc;
    }
    cplx position() const override { return pos_; }
    bool on_principal_branch() const override { return !left_origin_disc_; }
    std::unique_ptr<GermTracker> clone() const override { return std::make_unique<Tracker>(*this); }

    /// Bound on the error of value() at the current position under the tail model.
    double error_estimate() const {
      const double w = std::abs(pos_ - center_) / scale_;
      double e = 0.0, p = 1.0;
      for (std::size_t k = 0; k < err_.size(); ++k, p *= w) e += err_[k] * p + 4.0 * eps * std::abs(alpha_[k]) * p;
      const double qw = tail_ratio * w;
      e += amplitude_ * std::pow(qw, double(alpha_.size())) / (1.0 - qw);
      // The tail model is exact for a simple pole, so leave room for rounding in the comparison.
      return 2.0 * e;
    }
    std::size_t chain_length() const { return steps_; }
    /// Number of coefficients currently retained.
    std::size_t retained_order() const { return alpha_.size(); }

   private:
    static constexpr int max_steps = 100000;
    static constexpr double eps = std::numeric_limits<double>::epsilon();
    /// Decay ratio of the scaled coefficients implied by the sampling scale s = R/3.
    static constexpr double tail_ratio = 1.0 / 3.0;

    double radius() const { return 3.0 * scale_; }

    void refresh_amplitude() {
      amplitude_ = 0.0;
      double p = 1.0;
      for (std::size_t k = 0; k < alpha_.size(); ++k, p /= tail_ratio)
        amplitude_ = std::max(amplitude_, std::abs(alpha_[k]) * p);
    }

    /// In-place Taylor shift: coefficients of P(x + u) from those of P(x).
    template <class T, class U>
    static void taylor_shift(std::vector<T>& a, U u) {
      const std::size_t n = a.size();
      for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = n - 1; j-- > i;) a[j] += u * a[j + 1];
    }

    void recenter(cplx c) {
      const double R = std::min(g_->singular_distance(c), 3e6);
      if (!(R > 1e-12 * initial_radius_)) fail(ErrorCode::DiscChainUnderflow, g_->name_ + ": disc radius collapsed");
      const double s_new = R / 3.0;
      const cplx u = (c - center_) / scale_;
      const double v = s_new / scale_;
      const std::size_t K = alpha_.size();

      // Error bounds: retained errors, rounding of the shift, and the modeled tail beyond K.
      const std::size_t ext = 3 * K + 100;
      std::vector<double> bound(ext, 0.0), mag(K);
      double p = std::pow(tail_ratio, double(K));
      for (std::size_t k = 0; k < ext; ++k) {
        if (k < K) {
          bound[k] = err_[k];
          mag[k] = std::abs(alpha_[k]);
        } else {
          bound[k] = amplitude_ * p;
          p *= tail_ratio;
        }
      }
      const double au = std::abs(u);
      taylor_shift(bound, au);
      taylor_shift(mag, au);
      taylor_shift(alpha_, u);

      std::vector<double> next_err(K);
      double vj = 1.0;
      for (std::size_t j = 0; j < K; ++j, vj *= v) {
        alpha_[j] *= vj;
        next_err[j] = (bound[j] + 4.0 * eps * double(K + 1) * mag[j]) * vj;
      }
      // Keep the leading run of coefficients that are larger than their error bounds.
      std::size_t keep = 1;
      while (keep < K && next_err[keep] < std::abs(alpha_[keep])) ++keep;
      alpha_.resize(keep);
      next_err.resize(keep);
      err_ = std::move(next_err);
      center_ = c;
      scale_ = s_new;
      refresh_amplitude();
      ++steps_;
      if (std::abs(center_) >= initial_radius_) left_origin_disc_ = true;
    }

    const TaylorGerm* g_;
    std::vector<cplx> alpha_;
    std::vector<double> err_;
    cplx center_{0.0, 0.0};
    cplx pos_{0.0, 0.0};
    double scale_ = 1.0;
    double initial_radius_ = 1.0;
    double amplitude_ = 0.0;
    std::size_t steps_ = 0;
    bool left_origin_disc_ = false;
  };

  std::unique_ptr<GermTracker> tracker() const override { return std::make_unique<Tracker>(this); }

 private:
  std::string name_;
  std::vector<cplx> coeffs_;
  std::vector<cplx> singular_;
  double radius_;
  double max_error_ = 1e-6;
};

/// Germ multiplied by -zeta (Borel image of d/dz).
class MinusZetaGerm : public Germ {
 public:
  explicit MinusZetaGerm(GermPtr inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "minus_zeta*" + inner_->name(); }
  double singular_distance(cplx z) const override { return inner_->singular_distance(z); }
  double origin_radius() const override { return inner_->origin_radius(); }
  cplx eval_principal(cplx zeta) const override { return -zeta * inner_->eval_principal(zeta); }

  class Tracker : public GermTracker {
   public:
    explicit Tracker(std::unique_ptr<GermTracker> t) : t_(std::move(t)) {}
    void advance(cplx to) override { t_->advance(to); }
    cplx value() const override { return -t_->position() * t_->value(); }
    cplx position() const override { return t_->position(); }
    bool on_principal_branch() const override { return t_->on_principal_branch(); }
    std::unique_ptr<GermTracker> clone() const override { return std::make_unique<Tracker>(t_->clone()); }

   private:
    std::unique_ptr<GermTracker> t_;
  };
  std::unique_ptr<GermTracker> tracker() const override { return std::make_unique<Tracker>(inner_->tracker()); }

 private:
  GermPtr inner_;
};

/// Finite linear combination sum_j c_j phi_j of germs.
class SumGerm : public Germ {
 public:
  explicit SumGerm(std::vector<std::pair<cplx, GermPtr>> terms, std::string name = "sum")
      : terms_(std::move(terms)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  double singular_distance(cplx z) const override {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [c, g] : terms_) d = std::min(d, g->singular_distance(z));
    return d;
  }
  double origin_radius() const override {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [c, g] : terms_) d = std::min(d, g->origin_radius());
    return d;
  }
  cplx eval_principal(cplx zeta) const override {
    cplx acc = 0.0;
    for (const auto& [c, g] : terms_) acc += c * g->eval_principal(zeta);
    return acc;
  }

  class Tracker : public GermTracker {
   public:
    Tracker(const SumGerm* g, std::vector<std::unique_ptr<GermTracker>> ts) : g_(g), ts_(std::move(ts)) {}
    void advance(cplx to) override {
      for (auto& t : ts_) t->advance(to);
      pos_ = to;
    }
    cplx value() const override {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < ts_.size(); ++j) acc += g_->terms_[j].first * ts_[j]->value();
      return acc;
    }
    cplx position() const override { return pos_; }
    bool on_principal_branch() const override {
      for (const auto& t : ts_)
        if (!t->on_principal_branch()) return false;
      return true;
    }
    std::unique_ptr<GermTracker> clone() const override {
      std::vector<std::unique_ptr<GermTracker>> c;
      for (const auto& t : ts_) c.push_back(t->clone());
      auto out = std::make_unique<Tracker>(g_, std::move(c));
      out->pos_ = pos_;
      return out;
    }

   private:
    const SumGerm* g_;
    std::vector<std::unique_ptr<GermTracker>> ts_;
    cplx pos_{0.0, 0.0};
  };
  std::unique_ptr<GermTracker> tracker() const override {
    std::vector<std::unique_ptr<GermTracker>> ts;
    for (const auto& [c, g] : terms_) ts.push_back(g->tracker());
    return std::make_unique<Tracker>(this, std::move(ts));
  }

 private:
  std::vector<std::pair<cplx, GermPtr>> terms_;
  std::string name_;
};

namespace detail {

/// coth(w) evaluated without overflow for large |Re w|.
inline cplx stable_coth(cplx w) {
  if (w.real() < 0) return -stable_coth(-w);
  const cplx e = std::exp(-2.0 * w);
  return (1.0 + e) / (1.0 - e);
}

/// Taylor coefficients B_{2k}/(2k)! of zeta^{-2}(zeta/2 coth(zeta/2) - 1), as doubles.
inline const std::vector<double>& stirling_kernel_coeffs() {
  static const std::vector<double> c = [] {
    auto B = bernoulli_numbers(62);
    std::vector<double> out;
    Rational fact = 1;
    for (int m = 1; m <= 62; ++m) {
      fact *= m;
      if (m % 2 == 0) out.push_back(Rational(B[m] / fact).get_d());
    }
    return out;
  }();
  return c;
}

}  // namespace detail

/// zeta^{-2} (zeta/2 coth(zeta/2) - 1), the Borel germ of the Stirling series.
inline cplx stirling_kernel(cplx zeta) {
  if (std::abs(zeta) < 1.5) {
    const auto& c = detail::stirling_kernel_coeffs();
    const cplx z2 = zeta * zeta;
    cplx acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z2 + c[k];
    return acc;
  }
  const cplx w = 0.5 * zeta;
  return (w * detail::stable_coth(w) - 1.0) / (zeta * zeta);
}

/// -log(1 - zeta)/zeta with log(1 - zeta) = Log(1 - zeta) + 2 pi i k.
inline cplx log_over_zeta_branch(cplx zeta, long k) {
  if (k != 0 && std::abs(zeta) < 1e-300)
    fail(ErrorCode::DomainError, "non-principal branches of -log(1-zeta)/zeta have a pole at 0");
  if (std::abs(zeta) < 0.25) {
    cplx acc = 0.0;
    for (int n = 60; n >= 0; --n) acc = acc * zeta + 1.0 / (n + 1.0);
    return acc - (k != 0 ? cplx(0.0, 2.0 * std::numbers::pi * static_cast<double>(k)) / zeta : cplx(0.0));
  }
  return -(std::log(1.0 - zeta) + cplx(0.0, 2.0 * std::numbers::pi * static_cast<double>(k))) / zeta;
}

inline GermPtr make_one_germ() {
  return std::make_shared<MeromorphicGerm>("one", [](cplx) { return cplx(1.0, 0.0); },
                                           [](cplx) { return std::numeric_limits<double>::infinity(); });
}

inline GermPtr make_geometric_germ() {
  return MeromorphicGerm::with_poles("geometric", [](cplx z) { return 1.0 / (1.0 - z); }, {cplx(1.0, 0.0)});
}

inline GermPtr make_euler_germ() {
  return MeromorphicGerm::with_poles("euler", [](cplx z) { return 1.0 / (1.0 + z); }, {cplx(-1.0, 0.0)});
}

inline GermPtr make_stirling_germ() {
  return std::make_shared<MeromorphicGerm>("stirling", stirling_kernel, [](cplx z) {
    // Poles at 2 pi i k, k != 0.
    const double period = 2.0 * std::numbers::pi;
    const double k = std::round(z.imag() / period);
    double best = std::numeric_limits<double>::infinity();
    for (double kk : {k - 1, k, k + 1})
      if (kk != 0) best = std::min(best, std::abs(z - cplx(0.0, kk * period)));
    return best;
  });
}

inline GermPtr make_log_over_zeta_germ() {
  return std::make_shared<LogBranchGerm>("log_over_zeta", std::vector<cplx>{cplx(1.0, 0.0)},
                                         [](cplx z, const std::vector<long>& k) { return log_over_zeta_branch(z, k[0]); });
}

/// Germ registry addressable by name.
inline GermPtr make_germ(const std::string& name) {
  static const std::map<std::string, GermPtr (*)()> registry{
      {"one", make_one_germ},
      {"geometric", make_geometric_germ},
      {"euler", make_euler_germ},
      {"stirling", make_stirling_germ},
      {"log_over_zeta", make_log_over_zeta_germ},
  };
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::ParseError, "unknown germ '" + name + "'");
  return it->second();
}

inline std::vector<std::string> germ_names() { return {"one", "geometric", "euler", "stirling", "log_over_zeta"}; }

/// Constant term and Taylor series associated with a registered germ (the series whose Borel image it is).
inline FloatSeries registered_series(const std::string& name, int order) {
  if (name == "one") return FloatSeries::monomial(0, order);
  if (name == "geometric") return geometric_series<cplx>(order);
  if (name == "euler") return euler_series<cplx>(order);
  if (name == "stirling") return stirling_series<cplx>(order);
  if (name == "log_over_zeta") {
    FloatSeries s(order);
    // -log(1-zeta)/zeta = sum zeta^n/(n+1), so a_n = n!/(n+1).
    double f = 1.0;
    for (int n = 0; n <= order; ++n) {
      if (n > 0) f *= n;
      s.coeff(n) = f / (n + 1.0);
    }
    return s;
  }
  fail(ErrorCode::ParseError, "unknown germ '" + name + "'");
}

}  // namespace resurgence
