#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "osgm/learners.hpp"
#include "osgm/problems.hpp"
#include "osgm/scaling.hpp"
#include "osgm/solvers.hpp"
#include "osgm/surrogates.hpp"

namespace osgm {

/// A recorded sequence of surrogate losses l_{x^k}(.) that can be evaluated
/// at any P after the run.
class FrozenLosses {
 public:
  FrozenLosses(Objective obj, SurrogateKind kind, std::vector<FrozenStep> steps)
      : obj_(std::move(obj)), kind_(kind), steps_(std::move(steps)) {}

  std::size_t size() const { return steps_.size(); }
  SurrogateKind kind() const { return kind_; }
  const Objective& objective() const { return obj_; }
  const std::vector<FrozenStep>& steps() const { return steps_; }

  double value(std::size_t k, const ScalingPattern& p, const Vec& coeffs) const {
    StepCache c = cache(k, p, coeffs);
    switch (kind_) {
      case SurrogateKind::ratio: return ratio_value(c);
      case SurrogateKind::hyper: return hyper_value(c);
      case SurrogateKind::gnorm:
        c.ensure_g_plus(obj_);
        return gnorm_value(c);
    }
    return 0.0;
  }

  Vec grad(std::size_t k, const ScalingPattern& p, const Vec& coeffs) const {
    StepCache c = cache(k, p, coeffs);
    c.ensure_g_plus(obj_);
    switch (kind_) {
      case SurrogateKind::ratio: return ratio_grad(c, p);
      case SurrogateKind::hyper: return hyper_grad(c, p);
      case SurrogateKind::gnorm:
        if (c.plus_gradient().norm() == 0.0) return Vec::Zero(coeffs.size());
        return gnorm_grad(c, obj_, p);
    }
    return Vec();
  }

  double total(const ScalingPattern& p, const Vec& coeffs) const {
    double s = 0.0;
    for (std::size_t k = 0; k < steps_.size(); ++k) s += value(k, p, coeffs);
    return s;
  }

 private:
  StepCache cache(std::size_t k, const ScalingPattern& p, const Vec& coeffs) const {
    const FrozenStep& s = steps_.at(k);
    StepCache c;
    c.x = s.x;
    c.fx = s.fx;
    c.gx = s.gx;
    c.x_plus = s.x - apply(p, coeffs, s.gx);
    c.f_plus = obj_.value(c.x_plus);
    c.ref_value = s.ref;
    return c;
  }

  Objective obj_;
  SurrogateKind kind_;
  std::vector<FrozenStep> steps_;
};

struct HindsightResult {
  Vec coeffs;
  double theta = 0.0;  // average loss at coeffs
  long passes = 0;
};

/// Minimizes the average frozen loss over the pattern's feasible set by
/// projected gradient descent: up to `max_passes` full passes, stopping when
/// the largest coefficient change drops below 1e-12. The stepsize defaults
/// to 1/(4L^2) for the ratio and gradient-norm losses and to
/// min{1/(4L^2), 1/L} for the hypergradient loss; a pass that would raise
/// the average halves the stepsize instead of moving.
inline HindsightResult hindsight_best(const FrozenLosses& losses, const ScalingPattern& p,
                                      std::optional<Vec> start = std::nullopt,
                                      long max_passes = 10000,
                                      std::optional<double> stepsize = std::nullopt) {
  HindsightResult out;
  const std::size_t count = losses.size();
  out.coeffs = start ? project(p, *start) : Vec(Vec::Zero(p.num_coeffs()));
  if (count == 0) return out;
  const double L = losses.objective().smoothness();
  double step = stepsize.value_or(losses.kind() == SurrogateKind::hyper
                                      ? std::min(1.0 / (4.0 * L * L), 1.0 / L)
                                      : 1.0 / (4.0 * L * L));
  const double inv = 1.0 / static_cast<double>(count);
  auto average = [&](const Vec& c) { return losses.total(p, c) * inv; };
  double current = average(out.coeffs);
  for (long pass = 1; pass <= max_passes; ++pass) {
    out.passes = pass;
    Vec g = Vec::Zero(p.num_coeffs());
    for (std::size_t k = 0; k < count; ++k) g += losses.grad(k, p, out.coeffs);
    g *= inv;
    Vec next = project(p, out.coeffs - step * g);
    const double change = (next - out.coeffs).cwiseAbs().maxCoeff();
    if (change < 1e-12) break;
    const double value = average(next);
    if (value <= current) {
      out.coeffs = std::move(next);
      current = value;
    } else {
      step *= 0.5;
    }
  }
  out.theta = current;
  return out;
}

enum class TraceBound { amgm, hyper_strongcvx, hyper_cvx_fval, hyper_cvx_gnorm, superlinear };

inline const char* to_string(TraceBound b) {
  switch (b) {
    case TraceBound::amgm: return "amgm";
    case TraceBound::hyper_strongcvx: return "hyper_strongcvx";
    case TraceBound::hyper_cvx_fval: return "hyper_cvx_fval";
    case TraceBound::hyper_cvx_gnorm: return "hyper_cvx_gnorm";
    case TraceBound::superlinear: return "superlinear";
  }
  return "?";
}

inline std::optional<TraceBound> parse_bound(const std::string& s) {
  for (auto b : {TraceBound::amgm, TraceBound::hyper_strongcvx, TraceBound::hyper_cvx_fval,
                 TraceBound::hyper_cvx_gnorm, TraceBound::superlinear}) {
    if (s == to_string(b)) return b;
  }
  return std::nullopt;
}

/// Problem constants a bound may need.
struct BoundContext {
  Measure measure = Measure::fgap;          // amgm only
  std::optional<double> strong_convexity;   // mu
  std::optional<double> smoothness;         // L
  std::optional<double> scaling_distance;   // ||P1 - A^{-1}||_F for superlinear
  double stop_below_gap = 0.0;              // superlinear: stop once f gap < this
};

struct VerifyReport {
  TraceBound bound = TraceBound::amgm;
  bool applicable = true;
  std::string reason;
  long checked = 0;
  double max_violation = 0.0;  // max over K of (lhs - rhs)/rhs, clipped at 0
  long worst_k = 0;

  bool passed(double tol = 1e-9) const { return applicable && max_violation <= tol; }
};

namespace detail {

/// Relative violation of lhs <= exp(log_rhs), evaluated in log space.
inline double log_violation(double lhs, double log_rhs) {
  if (lhs <= 0.0) return 0.0;
  const double d = std::log(lhs) - log_rhs;
  return d > 0.0 ? std::expm1(d) : 0.0;
}

inline void record(VerifyReport& r, long k, double violation) {
  ++r.checked;
  if (violation > r.max_violation) {
    r.max_violation = violation;
    r.worst_k = k;
  }
}

inline VerifyReport not_applicable(TraceBound b, std::string why) {
  VerifyReport r;
  r.bound = b;
  r.applicable = false;
  r.reason = std::move(why);
  return r;
}

}  // namespace detail

/// Checks one inequality at every K along a recorded trace.
///
///   amgm             phi(x^{K+1}) <= phi(x^1) (mean_k phi(x^{k+1})/phi(x^k))^K
///   hyper_strongcvx  gap_{K+1} <= gap_1 (1 - 2 mu max{mean_k -h_k, 0})^K
///   hyper_cvx_gnorm  min_{k<=K} ||g_k||^2 <= gap_1 / (K max{mean_k -h_k, 0})
///   hyper_cvx_fval   gap_{K+1} <= Delta^2 / (K max{mean_k -h_k, 0}), Delta^2 = 2 gap_1 / mu
///   superlinear      gap_{K+1} <= gap_1 (4 L^2 ||P1 - A^{-1}||_F^2 / K)^K
///
/// The hypergradient bounds read h_k from the surrogate column and presume
/// a trace produced under a monotone oracle.
inline VerifyReport verify_trace(const std::vector<TraceRecord>& trace, TraceBound bound,
                                 const BoundContext& ctx = {}) {
  VerifyReport rep;
  rep.bound = bound;
  if (trace.size() < 2) return detail::not_applicable(bound, "trace has fewer than two rows");

  auto needs_gaps = [&]() -> bool {
    for (const auto& row : trace)
      if (!std::isfinite(row.f_gap)) return false;
    return true;
  };

  switch (bound) {
    case TraceBound::amgm: {
      auto phi = [&](const TraceRecord& r) {
        return ctx.measure == Measure::fgap ? r.f_gap : r.grad_norm;
      };
      if (ctx.measure == Measure::fgap && !std::isfinite(trace[0].f_gap)) {
        return detail::not_applicable(bound, "trace has no f gap column values");
      }
      const double phi1 = phi(trace[0]);
      if (!(phi1 > 0.0)) return detail::not_applicable(bound, "phi(x^1) must be positive");
      double ratio_sum = 0.0;
      for (std::size_t k = 1; k < trace.size(); ++k) {
        const double prev = phi(trace[k - 1]);
        const double cur = phi(trace[k]);
        if (!(prev > 0.0) || !(cur >= 0.0) || !std::isfinite(cur)) break;
        ratio_sum += cur / prev;
        const double K = static_cast<double>(k);
        const double log_rhs = std::log(phi1) + K * std::log(ratio_sum / K);
        detail::record(rep, static_cast<long>(k), detail::log_violation(cur, log_rhs));
      }
      return rep;
    }

    case TraceBound::hyper_strongcvx:
    case TraceBound::hyper_cvx_fval:
    case TraceBound::hyper_cvx_gnorm: {
      if (!needs_gaps()) return detail::not_applicable(bound, "f* unknown");
      const bool needs_mu = bound != TraceBound::hyper_cvx_gnorm;
      if (needs_mu && !(ctx.strong_convexity && *ctx.strong_convexity > 0.0)) {
        return detail::not_applicable(bound, "needs mu > 0");
      }
      const double gap1 = trace[0].f_gap;
      double neg_h_sum = 0.0;
      double min_g2 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < trace.size(); ++k) {
        const double h = trace[k - 1].surrogate;
        if (!std::isfinite(h)) break;
        neg_h_sum -= h;
        min_g2 = std::min(min_g2, trace[k - 1].grad_norm * trace[k - 1].grad_norm);
        const double K = static_cast<double>(k);
        const double avg = std::max(neg_h_sum / K, 0.0);
        const double lhs_gap = std::max(trace[k].f_gap, 0.0);
        double violation = 0.0;
        if (bound == TraceBound::hyper_strongcvx) {
          const double base = 1.0 - 2.0 * *ctx.strong_convexity * avg;
          if (base <= 0.0) {
            violation = lhs_gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
          } else {
            violation = detail::log_violation(lhs_gap, std::log(gap1) + K * std::log(base));
          }
        } else if (avg > 0.0) {
          const double numer =
              bound == TraceBound::hyper_cvx_fval ? 2.0 * gap1 / *ctx.strong_convexity : gap1;
          const double lhs = bound == TraceBound::hyper_cvx_fval ? lhs_gap : min_g2;
          violation = detail::log_violation(lhs, std::log(numer) - std::log(K * avg));
        }
        detail::record(rep, static_cast<long>(k), violation);
      }
      return rep;
    }

    case TraceBound::superlinear: {
      if (!needs_gaps()) return detail::not_applicable(bound, "f* unknown");
      if (!ctx.smoothness || !ctx.scaling_distance) {
        return detail::not_applicable(bound, "needs L and ||P1 - A^{-1}||_F");
      }
      const double L = *ctx.smoothness;
      const double c = 4.0 * L * L * *ctx.scaling_distance * *ctx.scaling_distance;
      const double gap1 = trace[0].f_gap;
      const double log_floor = std::log(std::numeric_limits<double>::min());
      for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k - 1].f_gap < ctx.stop_below_gap) break;
        const double K = static_cast<double>(k);
        const double log_rhs = std::log(gap1) + K * std::log(c / K);
        if (log_rhs < log_floor) break;
        detail::record(rep, static_cast<long>(k), detail::log_violation(trace[k].f_gap, log_rhs));
      }
      return rep;
    }
  }
  return rep;
}

/// Regret of the played scaling matrices against one comparator.
inline double regret_against(const FrozenLosses& losses, const ScalingPattern& p,
                             const Vec& comparator) {
  double played = 0.0;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    played += losses.value(k, p, losses.steps()[k].scaling);
  }
  return played - losses.total(p, comparator);
}

/// Case analysis for one double-loop round, given f* and the hindsight
/// constants (kappa*, R = ||P* - P1||_F, L) of a feasible reference scaling.
struct RoundCheck {
  bool case_gap_bound = false;    // f(x^{K+1}) - f* <= (f(x^1) - f*)(1 - 1/(2 kappa*) + rho_K/K)^K
  bool case_bound_halved = false; // z+ <= f* and f* - z+ <= (f* - z)/2
  bool holds() const { return case_gap_bound || case_bound_halved; }
};

inline RoundCheck check_round(const OuterRound& r, double f_star, double kappa_star,
                              double reference_distance, double smoothness) {
  RoundCheck out;
  const double tol = 1e-12 * (1.0 + std::abs(f_star));
  const double K = static_cast<double>(std::max<long>(r.inner_iters, 1));
  const double L = smoothness;
  const double R = reference_distance;
  const double rho = std::max(4.0 * L * std::sqrt(K) * R, 8.0 * L * L * R * R);
  const double base = 1.0 - 1.0 / (2.0 * kappa_star) + rho / K;
  const double gap_start = r.f_start - f_star;
  const double gap_last = r.f_last - f_star;
  const double log_rhs = std::log(std::max(gap_start, 0.0)) + K * std::log(base);
  out.case_gap_bound = gap_last <= tol || detail::log_violation(gap_last, log_rhs) <= 1e-9;
  const double z_plus = 0.5 * (r.f_best + r.z);
  out.case_bound_halved = z_plus <= f_star + tol && (f_star - z_plus) <= 0.5 * (f_star - r.z) + tol;
  return out;
}

}  // namespace osgm
