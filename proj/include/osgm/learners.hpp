#pragma once

#include <cmath>
#include <optional>
#include <variant>

#include "osgm/error.hpp"
#include "osgm/scaling.hpp"

namespace osgm {

struct OgdRule {
  double eta = 0.0;
};

struct AdaGradRule {
  double eta = 0.0;
  Vec accum;  // per-coordinate sum of squared gradients
  double eps = 1e-12;
};

using LearnerRule = std::variant<OgdRule, AdaGradRule>;

/// Online learner over pattern coordinates. `current` is always feasible.
struct LearnerState {
  ScalingMatrix current;
  LearnerRule rule;
  long step_count = 0;

  static LearnerState ogd(ScalingMatrix start, double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::invalid_argument, "OGD stepsize must be positive");
    start.coeffs = project(*start.pattern, start.coeffs);
    return {std::move(start), OgdRule{eta}, 0};
  }

  static LearnerState adagrad(ScalingMatrix start, double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::invalid_argument, "AdaGrad stepsize must be positive");
    start.coeffs = project(*start.pattern, start.coeffs);
    Vec acc = Vec::Zero(start.coeffs.size());
    return {std::move(start), AdaGradRule{eta, std::move(acc)}, 0};
  }
};

namespace detail {
inline void check_learner_grad(const LearnerState& s, const Vec& grad) {
  require_dim(grad, s.current.coeffs.size(), "learner gradient");
  if (!grad.allFinite()) throw Error(ErrorCode::non_finite, "learner gradient");
}
}  // namespace detail

/// current <- Proj(current - eta * grad).
inline void ogd_update(LearnerState& s, const Vec& grad) {
  auto* rule = std::get_if<OgdRule>(&s.rule);
  if (!rule) throw Error(ErrorCode::invalid_argument, "ogd_update on a non-OGD learner");
  detail::check_learner_grad(s, grad);
  s.current.coeffs = project(*s.current.pattern, s.current.coeffs - rule->eta * grad);
  ++s.step_count;
}

/// accum += grad^2; current <- Proj(current - eta * grad / sqrt(accum + eps)).
inline void adagrad_update(LearnerState& s, const Vec& grad) {
  auto* rule = std::get_if<AdaGradRule>(&s.rule);
  if (!rule) throw Error(ErrorCode::invalid_argument, "adagrad_update on a non-AdaGrad learner");
  detail::check_learner_grad(s, grad);
  rule->accum += grad.cwiseAbs2();
  Vec step = grad.array() / (rule->accum.array() + rule->eps).sqrt();
  s.current.coeffs = project(*s.current.pattern, s.current.coeffs - rule->eta * step);
  ++s.step_count;
}

inline void learner_update(LearnerState& s, const Vec& grad) {
  if (std::holds_alternative<OgdRule>(s.rule)) ogd_update(s, grad);
  else adagrad_update(s, grad);
}

enum class SurrogateKind { ratio, gnorm, hyper };

/// Stepsizes from the regret analyses.
///   ratio: min{1/(4L^2), D/(2L(1+LD)sqrt K)}; with D unbounded and a
///          reference distance R = ||P* - P1||_F, min{1/(4L^2), R/(2L sqrt K)}
///   gnorm: 2D/(L sqrt K)
///   hyper: 2D/((LD+1) sqrt K)
inline double theory_stepsize(SurrogateKind kind, double smoothness, std::optional<double> radius,
                              long horizon, std::optional<double> reference_distance = std::nullopt) {
  const double L = smoothness;
  if (!(L > 0.0) || horizon < 1) {
    throw Error(ErrorCode::invalid_argument, "theory stepsize needs L > 0 and K >= 1");
  }
  if (radius && !(*radius > 0.0)) throw Error(ErrorCode::invalid_argument, "D must be positive");
  const double sqrt_k = std::sqrt(static_cast<double>(horizon));
  switch (kind) {
    case SurrogateKind::ratio:
      if (radius) {
        const double D = *radius;
        return std::min(1.0 / (4.0 * L * L), D / (2.0 * L * (1.0 + L * D) * sqrt_k));
      }
      if (reference_distance) {
        return std::min(1.0 / (4.0 * L * L), *reference_distance / (2.0 * L * sqrt_k));
      }
      break;
    case SurrogateKind::gnorm:
      if (radius) return 2.0 * *radius / (L * sqrt_k);
      break;
    case SurrogateKind::hyper:
      if (radius) return 2.0 * *radius / ((L * *radius + 1.0) * sqrt_k);
      break;
  }
  throw Error(ErrorCode::invalid_argument, "theory stepsize needs bounded scaling set");
}

}  // namespace osgm
