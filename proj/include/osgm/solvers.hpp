#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osgm/error.hpp"
#include "osgm/learners.hpp"
#include "osgm/oracles.hpp"
#include "osgm/problems.hpp"
#include "osgm/scaling.hpp"
#include "osgm/surrogates.hpp"

namespace osgm {

enum class Variant {
  osgm_r,
  osgm_g,
  osgm_h,
  osgm_rz,
  double_loop,
  gd,
  agd,
  sagd,
  adagrad,
  precond_gd,
};

enum class LearnerKind { ogd, adagrad };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::osgm_r: return "osgm-r";
    case Variant::osgm_g: return "osgm-g";
    case Variant::osgm_h: return "osgm-h";
    case Variant::osgm_rz: return "osgm-rz";
    case Variant::double_loop: return "double-loop";
    case Variant::gd: return "gd";
    case Variant::agd: return "agd";
    case Variant::sagd: return "sagd";
    case Variant::adagrad: return "adagrad";
    case Variant::precond_gd: return "precond-gd";
  }
  return "?";
}

inline bool is_osgm(Variant v) {
  return v == Variant::osgm_r || v == Variant::osgm_g || v == Variant::osgm_h ||
         v == Variant::osgm_rz || v == Variant::double_loop;
}

struct SolverConfig {
  Variant variant = Variant::osgm_r;
  std::shared_ptr<const ScalingPattern> pattern;  // OSGM variants
  LearnerKind learner = LearnerKind::adagrad;
  double learner_eta = 0.1;
  std::optional<Vec> initial_scaling;  // P1 coefficients; zero when absent
  OracleKind oracle = OracleKind::simple_comparison;
  LineSearchParams line_search;
  long max_iters = 10000;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0;
  std::optional<double> z_init;  // lower bound for r^z modes
  bool heuristic_z = false;      // adjust z when it exceeds f(x^k) instead of failing
  bool warm_start_gd = false;    // OSGM-G two-stage start
  std::optional<double> warm_start_threshold;
  long outer_iters = 30;  // double loop rounds; inner budget is max_iters
  double baseline_eta = 0.1;  // x-space AdaGrad stepsize
  std::optional<ScalingMatrix> fixed_scaling;  // PrecondGD
  bool record_timing = true;
  bool record_steps = false;  // keep (x, f, grad f, P) per step for hindsight analysis
  std::optional<double> report_reference;  // trace gap reference when f* is unknown
};

struct TraceRecord {
  long iter = 0;
  double f_value = 0.0;
  double f_gap = 0.0;  // f - f*; else f - report_reference, else f - z, else NaN
  double grad_norm = 0.0;
  double surrogate = std::numeric_limits<double>::quiet_NaN();  // NaN on rows without a step
  bool oracle_accepted = false;
  long grad_evals = 0;
  std::int64_t time_ns = 0;
};

enum class StopReason { grad_tol, gap_floor, max_iters, non_finite };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::gap_floor: return "gap_floor";
    case StopReason::max_iters: return "max_iters";
    case StopReason::non_finite: return "non_finite";
  }
  return "?";
}

/// Inputs of one online loss, frozen so the loss can be re-evaluated at any P.
struct FrozenStep {
  Vec x;
  double fx = 0.0;
  Vec gx;
  double ref = 0.0;
  Vec scaling;  // P_k coefficients used at this step
};

struct SolveResult {
  Vec x_best;
  double f_best = 0.0;
  Vec x_last;
  std::vector<TraceRecord> trace;
  StopReason stop = StopReason::max_iters;
  std::optional<ScalingMatrix> final_scaling;
  std::vector<FrozenStep> steps;
  double final_z = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;  // steps taken

  long grad_evals() const { return trace.empty() ? 0 : trace.back().grad_evals; }
  bool converged() const { return stop == StopReason::grad_tol || stop == StopReason::gap_floor; }
};

namespace detail {

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ns() const {
    if (!enabled_) return 0;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double trace_gap(const Objective& obj, const Vec& x, double fx, std::optional<double> z,
                        std::optional<double> report_reference = std::nullopt) {
  if (obj.f_star()) return *obj.gap(x);
  if (report_reference) return fx - *report_reference;
  if (z) return fx - *z;
  return nan();
}

inline SurrogateKind surrogate_of(Variant v) {
  switch (v) {
    case Variant::osgm_g: return SurrogateKind::gnorm;
    case Variant::osgm_h: return SurrogateKind::hyper;
    default: return SurrogateKind::ratio;
  }
}

inline void validate_osgm(const SolverConfig& cfg, const Objective& obj) {
  if (!cfg.pattern) throw Error(ErrorCode::invalid_argument, "OSGM needs a scaling pattern");
  if (cfg.pattern->n != obj.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "pattern dimension differs from the objective");
  }
  if (cfg.max_iters < 0) throw Error(ErrorCode::invalid_argument, "max_iters must be >= 0");
  if (cfg.variant == Variant::osgm_g) {
    if (cfg.oracle == OracleKind::none) {
      throw Error(ErrorCode::invalid_argument, "OSGM-G requires a monotone oracle");
    }
    if (!obj.has_hvp()) {
      throw Error(ErrorCode::hvp_unavailable, "OSGM-G needs Hessian-vector products (" + obj.name() + ")");
    }
  }
  if (cfg.variant == Variant::osgm_h && cfg.oracle == OracleKind::none) {
    throw Error(ErrorCode::invalid_argument, "OSGM-H requires a monotone oracle");
  }
  if (cfg.variant == Variant::osgm_r && !obj.f_star()) {
    throw Error(ErrorCode::invalid_argument, "OSGM-R needs a known f*; use OSGM-RZ with a lower bound");
  }
  if (cfg.oracle == OracleKind::steepest_descent && !obj.hessian_constant()) {
    throw Error(ErrorCode::invalid_argument, "steepest-descent oracle needs a constant Hessian");
  }
}

inline LearnerState make_learner(const SolverConfig& cfg) {
  ScalingMatrix start = ScalingMatrix::zero(cfg.pattern);
  if (cfg.initial_scaling) {
    require_dim(*cfg.initial_scaling, cfg.pattern->num_coeffs(), "initial scaling");
    start.coeffs = *cfg.initial_scaling;
  }
  return cfg.learner == LearnerKind::ogd ? LearnerState::ogd(std::move(start), cfg.learner_eta)
                                         : LearnerState::adagrad(std::move(start), cfg.learner_eta);
}

/// Shared loop for OSGM-R / -RZ / -G / -H.
inline SolveResult osgm_loop(const SolverConfig& cfg, const Objective& obj, const Vec& x1,
                             std::optional<double> z) {
  validate_osgm(cfg, obj);
  require_dim(x1, obj.dim(), "x1");
  const SurrogateKind kind = surrogate_of(cfg.variant);
  const bool ratio = kind == SurrogateKind::ratio;
  const Measure measure = kind == SurrogateKind::gnorm ? Measure::gnorm : Measure::fgap;
  const bool use_z = cfg.variant == Variant::osgm_rz || cfg.variant == Variant::double_loop;
  double ref = 0.0;
  if (ratio) ref = use_z ? *z : *obj.f_star();

  Stopwatch clock(cfg.record_timing);
  SolveResult res;
  Vec x = x1;
  double fx = obj.value(x);
  Vec gx = obj.grad(x);
  long evals = 1;
  res.x_best = x;
  res.f_best = fx;
  long k = 1;

  auto gap_of = [&](const Vec& pt, double fpt) {
    return trace_gap(obj, pt, fpt, use_z ? std::optional<double>(ref) : std::nullopt,
                     cfg.report_reference);
  };
  auto base_row = [&](long iter) {
    TraceRecord row;
    row.iter = iter;
    row.f_value = fx;
    row.f_gap = gap_of(x, fx);
    row.grad_norm = gx.norm();
    row.grad_evals = evals;
    row.time_ns = clock.elapsed_ns();
    return row;
  };
  auto visit = [&](const Vec& pt, double fpt) {
    if (fpt < res.f_best) {
      res.f_best = fpt;
      res.x_best = pt;
    }
  };

  // Two-stage start: plain GD until the gradient is small enough.
  if (cfg.variant == Variant::osgm_g && cfg.warm_start_gd) {
    double threshold = cfg.warm_start_threshold.value_or(1e-2 * gx.norm());
    const double L = obj.smoothness();
    while (gx.norm() > threshold && gx.norm() > cfg.grad_tol && k <= cfg.max_iters) {
      TraceRecord row = base_row(k);
      x = x - gx / L;
      fx = obj.value(x);
      gx = obj.grad(x);
      ++evals;
      row.oracle_accepted = true;
      row.grad_evals = evals;
      res.trace.push_back(row);
      visit(x, fx);
      ++k;
    }
  }

  LearnerState learner = make_learner(cfg);
  const long last_iter = cfg.max_iters;  // warm-start steps count toward the budget
  bool frozen = false;   // learner stopped at the gap floor
  bool stalled = false;  // frozen and the oracle rejected the step
  for (;; ++k) {
    TraceRecord row = base_row(k);
    if (!std::isfinite(fx) || !gx.allFinite()) {
      res.stop = StopReason::non_finite;
      res.trace.push_back(row);
      break;
    }
    if (row.grad_norm <= cfg.grad_tol) {
      res.stop = StopReason::grad_tol;
      res.trace.push_back(row);
      break;
    }
    if (use_z && fx <= ref) {
      if (!cfg.heuristic_z) {
        throw Error(ErrorCode::invalid_lower_bound,
                    "z = " + std::to_string(ref) + " is not below f(x^k) = " + std::to_string(fx));
      }
      ref = fx - std::min(5.0 * (ref - fx), 1.0);
      row.f_gap = gap_of(x, fx);
    }
    // Below the gap floor the ratio loss carries no information: P is frozen
    // and the run continues with plain scaled steps.
    if (ratio && !frozen && !(fx - ref > gap_floor(ref))) frozen = true;
    if (stalled) {
      res.stop = StopReason::gap_floor;
      res.trace.push_back(row);
      break;
    }
    if (k > last_iter) {
      res.stop = StopReason::max_iters;
      res.trace.push_back(row);
      break;
    }

    StepCache cache = StepCache::make(obj, x, fx, gx, learner.current, ref);
    if (cache.ensure_g_plus(obj)) ++evals;

    std::optional<Vec> surrogate_grad;
    if (!frozen) {
      try {
        switch (kind) {
          case SurrogateKind::ratio:
            row.surrogate = ratio_value(cache);
            surrogate_grad = ratio_grad(cache, *cfg.pattern);
            break;
          case SurrogateKind::gnorm:
            row.surrogate = gnorm_value(cache);
            surrogate_grad = gnorm_grad(cache, obj, *cfg.pattern);
            break;
          case SurrogateKind::hyper:
            row.surrogate = hyper_value(cache);
            surrogate_grad = hyper_grad(cache, *cfg.pattern);
            break;
        }
      } catch (const Error& e) {
        // x+ is already optimal; the oracle takes it and the next check stops.
        if (e.code() != ErrorCode::converged) throw;
      }
      if (cfg.record_steps) res.steps.push_back({x, fx, gx, ref, learner.current.coeffs});
    }

    OracleOutcome next;
    if (cfg.oracle == OracleKind::none) {
      next = {cache.x_plus, cache.f_plus, cache.plus_gradient(), true, 0};
    } else {
      next = monotone_oracle(cfg.oracle, measure, cache, obj, cfg.line_search);
    }
    evals += next.grad_evals;
    row.oracle_accepted = next.accepted;
    stalled = frozen && !next.accepted;
    row.grad_evals = evals;
    res.trace.push_back(row);

    if (surrogate_grad) {
      if (!surrogate_grad->allFinite()) {
        res.stop = StopReason::non_finite;
        break;
      }
      learner_update(learner, *surrogate_grad);
    }
    if (next.accepted) {
      x = std::move(next.x);
      fx = next.fx;
      gx = std::move(next.gx);
      if (std::isfinite(fx)) visit(x, fx);
    }
    ++res.iterations;
  }
  res.x_last = x;
  res.final_scaling = learner.current;
  if (use_z) res.final_z = ref;
  return res;
}

}  // namespace detail

/// OSGM-R, OSGM-G, OSGM-H (and OSGM-RZ with config.z_init).
///
/// Each iteration proposes x+ = x - P_k grad f(x), lets the oracle choose the
/// next iterate, then updates P from the surrogate gradient at (x^k, P_k),
/// whether or not the proposal was accepted.
inline SolveResult run_osgm(const SolverConfig& cfg, const Objective& obj, const Vec& x1) {
  if (cfg.variant == Variant::osgm_rz) {
    if (!cfg.z_init) throw Error(ErrorCode::invalid_argument, "OSGM-RZ needs z_init");
    return detail::osgm_loop(cfg, obj, x1, cfg.z_init);
  }
  if (cfg.variant != Variant::osgm_r && cfg.variant != Variant::osgm_g &&
      cfg.variant != Variant::osgm_h) {
    throw Error(ErrorCode::invalid_argument, std::string("run_osgm cannot run ") + to_string(cfg.variant));
  }
  return detail::osgm_loop(cfg, obj, x1, std::nullopt);
}

/// OSGM with the lower-bound ratio surrogate r^z.
inline SolveResult run_osgm_rz(SolverConfig cfg, const Objective& obj, const Vec& x1, double z) {
  cfg.variant = Variant::osgm_rz;
  cfg.z_init = z;
  if (!cfg.heuristic_z && !(z < obj.value(x1))) {
    throw Error(ErrorCode::invalid_lower_bound, "z must be below f(x1)");
  }
  return detail::osgm_loop(cfg, obj, x1, z);
}

/// One outer round of the double loop.
struct OuterRound {
  long round = 0;
  double z = 0.0;       // bound used by the inner run
  double z_next = 0.0;  // bound after the update
  double f_start = 0.0;  // f at the inner run's start point
  double f_last = 0.0;   // f at the inner run's final iterate
  double f_best = 0.0;   // min f over the inner run's iterates
  long inner_iters = 0;
  StopReason inner_stop = StopReason::max_iters;
};

struct DoubleLoopResult {
  Vec x_best;
  double f_best = 0.0;
  std::vector<OuterRound> history;
  std::vector<TraceRecord> trace;  // inner traces concatenated
};

/// Repeated OSGM-RZ runs from the previous best point, each restarting at P1;
/// after each round z <- (f_best + z)/2. In heuristic mode the halving is
/// skipped and z only moves when an inner run finds it above f(x^k).
inline DoubleLoopResult run_double_loop(SolverConfig cfg, const Objective& obj, const Vec& x1,
                                        double z1) {
  cfg.variant = Variant::double_loop;
  if (!cfg.heuristic_z && !(z1 < obj.value(x1))) {
    throw Error(ErrorCode::invalid_lower_bound, "z1 must be below f(x1)");
  }
  DoubleLoopResult out;
  Vec x = x1;
  double fx = obj.value(x);
  double z = z1;
  out.x_best = x;
  out.f_best = fx;
  long iter_offset = 0;
  long eval_offset = 0;
  std::int64_t time_offset = 0;
  for (long t = 1; t <= cfg.outer_iters; ++t) {
    SolveResult inner = detail::osgm_loop(cfg, obj, x, z);
    OuterRound round;
    round.round = t;
    round.z = z;
    round.f_start = fx;
    round.f_last = obj.value(inner.x_last);
    round.f_best = inner.f_best;
    round.inner_iters = inner.iterations;
    round.inner_stop = inner.stop;
    const double z_used = cfg.heuristic_z ? inner.final_z : z;
    round.z = z_used;
    z = cfg.heuristic_z ? inner.final_z : 0.5 * (inner.f_best + z);
    round.z_next = z;
    out.history.push_back(round);

    const bool last_round = t == cfg.outer_iters || inner.stop == StopReason::grad_tol ||
                            inner.stop == StopReason::non_finite;
    for (std::size_t i = 0; i < inner.trace.size(); ++i) {
      // The final row of a non-terminal round repeats the next round's first row.
      if (!last_round && i + 1 == inner.trace.size()) break;
      TraceRecord row = inner.trace[i];
      row.iter += iter_offset;
      row.grad_evals += eval_offset;
      row.time_ns += time_offset;
      out.trace.push_back(row);
    }
    iter_offset += inner.iterations;
    eval_offset += inner.grad_evals();
    if (!inner.trace.empty()) time_offset += inner.trace.back().time_ns;

    x = inner.x_best;
    fx = inner.f_best;
    if (fx < out.f_best) {
      out.f_best = fx;
      out.x_best = x;
    }
    if (last_round) break;
  }
  return out;
}

/// Gradient descent baselines: GD (1/L), AGD, SAGD, x-space AdaGrad and
/// GD with a fixed scaling matrix. Same stopping rules and trace schema as OSGM.
inline SolveResult run_baseline(const SolverConfig& cfg, const Objective& obj, const Vec& x1) {
  require_dim(x1, obj.dim(), "x1");
  const double L = obj.smoothness();
  const double mu = obj.strong_convexity();
  double momentum_sc = 0.0;
  switch (cfg.variant) {
    case Variant::gd:
    case Variant::agd:
    case Variant::adagrad:
      break;
    case Variant::sagd: {
      if (!(mu > 0.0)) throw Error(ErrorCode::invalid_argument, "SAGD needs mu > 0");
      const double sk = std::sqrt(L / mu);
      momentum_sc = (sk - 1.0) / (sk + 1.0);
      break;
    }
    case Variant::precond_gd:
      if (!cfg.fixed_scaling) throw Error(ErrorCode::invalid_argument, "PrecondGD needs a fixed P");
      if (cfg.fixed_scaling->dim() != obj.dim()) throw Error(ErrorCode::dimension_mismatch, "fixed P");
      break;
    default:
      throw Error(ErrorCode::invalid_argument, std::string("not a baseline: ") + to_string(cfg.variant));
  }
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_argument, "baseline needs L > 0");

  detail::Stopwatch clock(cfg.record_timing);
  SolveResult res;
  Vec x = x1;
  Vec x_prev = x1;
  double fx = obj.value(x);
  Vec gx = obj.grad(x);
  long evals = 1;
  Vec accum = Vec::Zero(x.size());
  res.x_best = x;
  res.f_best = fx;

  for (long k = 1;; ++k) {
    TraceRecord row;
    row.iter = k;
    row.f_value = fx;
    row.f_gap = detail::trace_gap(obj, x, fx, std::nullopt, cfg.report_reference);
    row.grad_norm = gx.norm();
    row.grad_evals = evals;
    row.time_ns = clock.elapsed_ns();
    if (!std::isfinite(fx) || !gx.allFinite()) {
      res.stop = StopReason::non_finite;
      res.trace.push_back(row);
      break;
    }
    if (row.grad_norm <= cfg.grad_tol) {
      res.stop = StopReason::grad_tol;
      res.trace.push_back(row);
      break;
    }
    if (k > cfg.max_iters) {
      res.stop = StopReason::max_iters;
      res.trace.push_back(row);
      break;
    }

    Vec x_next;
    switch (cfg.variant) {
      case Variant::gd: x_next = x - gx / L; break;
      case Variant::agd:
      case Variant::sagd: {
        const double beta = cfg.variant == Variant::agd
                                ? static_cast<double>(k - 1) / static_cast<double>(k + 2)
                                : momentum_sc;
        Vec y = x + beta * (x - x_prev);
        Vec gy = k == 1 ? gx : obj.grad(y);
        if (k > 1) ++evals;
        x_next = y - gy / L;
        break;
      }
      case Variant::adagrad:
        accum += gx.cwiseAbs2();
        x_next = x - cfg.baseline_eta * (gx.array() / (accum.array() + 1e-12).sqrt()).matrix();
        break;
      case Variant::precond_gd: x_next = x - apply(*cfg.fixed_scaling, gx); break;
      default: break;
    }
    x_prev = x;
    x = std::move(x_next);
    fx = obj.value(x);
    gx = obj.grad(x);
    ++evals;
    row.oracle_accepted = true;
    row.grad_evals = evals;
    res.trace.push_back(row);
    if (std::isfinite(fx) && fx < res.f_best) {
      res.f_best = fx;
      res.x_best = x;
    }
    ++res.iterations;
  }
  res.x_last = x;
  return res;
}

/// Dispatches on config.variant. DoubleLoop runs with z = config.z_init.
inline SolveResult run_solver(const SolverConfig& cfg, const Objective& obj, const Vec& x1) {
  switch (cfg.variant) {
    case Variant::osgm_r:
    case Variant::osgm_g:
    case Variant::osgm_h:
    case Variant::osgm_rz:
      return run_osgm(cfg, obj, x1);
    case Variant::double_loop: {
      if (!cfg.z_init) throw Error(ErrorCode::invalid_argument, "double loop needs z_init");
      DoubleLoopResult dl = run_double_loop(cfg, obj, x1, *cfg.z_init);
      SolveResult res;
      res.x_best = dl.x_best;
      res.f_best = dl.f_best;
      res.x_last = dl.x_best;
      res.trace = std::move(dl.trace);
      res.iterations = res.trace.empty() ? 0 : res.trace.back().iter - 1;
      res.stop = !res.trace.empty() && res.trace.back().grad_norm <= cfg.grad_tol
                     ? StopReason::grad_tol
                     : StopReason::max_iters;
      return res;
    }
    default:
      return run_baseline(cfg, obj, x1);
  }
}

}  // namespace osgm
