#pragma once

#include <cmath>
#include <optional>

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"
#include "osgm/problems.hpp"
#include "osgm/scaling.hpp"

namespace osgm {

/// Below this gap the ratio surrogates are numerically meaningless and the
/// solver reports convergence.
inline double gap_floor(double ref_value) { return 1e-14 * (1.0 + std::abs(ref_value)); }

/// One scaled step x+ = x - P g(x) and everything the surrogates need.
/// The gradient at x+ is filled on demand and then reused by the oracle and
/// the next iteration.
struct StepCache {
  Vec x;
  double fx = 0.0;
  Vec gx;
  Vec x_plus;
  double f_plus = 0.0;
  std::optional<Vec> g_plus;
  double ref_value = 0.0;  // f* for r, lower bound z for r^z; unused otherwise

  /// Builds the cache for the step from x under scaling P. Evaluates f(x+) only.
  static StepCache make(const Objective& obj, const Vec& x, double fx, const Vec& gx,
                        const ScalingMatrix& p, double ref_value = 0.0) {
    StepCache c;
    c.x = x;
    c.fx = fx;
    c.gx = gx;
    c.x_plus = x - apply(p, gx);
    c.f_plus = obj.value(c.x_plus);
    c.ref_value = ref_value;
    return c;
  }

  /// Returns true when this call evaluated a new gradient.
  bool ensure_g_plus(const Objective& obj) {
    if (g_plus) return false;
    g_plus = obj.grad(x_plus);
    return true;
  }

  const Vec& plus_gradient() const {
    if (!g_plus) throw Error(ErrorCode::invalid_argument, "gradient at x+ not evaluated");
    return *g_plus;
  }
};

namespace detail {

inline double ratio_denominator(const StepCache& c) {
  const double gap = c.fx - c.ref_value;
  if (!(gap > gap_floor(c.ref_value))) {
    throw Error(ErrorCode::converged, "f(x) - ref is below the gap floor");
  }
  return gap;
}

inline double grad_norm_or_converged(const StepCache& c) {
  const double gn = c.gx.norm();
  if (!(gn > 0.0)) throw Error(ErrorCode::converged, "zero gradient at x");
  return gn;
}

}  // namespace detail

// Ratio surrogate r_x(P) = (f(x+) - ref) / (f(x) - ref). With ref = z < f*
// this is the lower-bound variant r^z; the gradient formula is the same.

inline double ratio_value(const StepCache& c) {
  return (c.f_plus - c.ref_value) / detail::ratio_denominator(c);
}

inline Vec ratio_grad(const StepCache& c, const ScalingPattern& p) {
  const double gap = detail::ratio_denominator(c);
  return restrict_outer(c.plus_gradient(), c.gx, -1.0 / gap, p);
}

// Gradient-norm surrogate g_x(P) = ||grad f(x+)|| / ||grad f(x)||.

inline double gnorm_value(const StepCache& c) {
  const double gn = detail::grad_norm_or_converged(c);
  return c.plus_gradient().norm() / gn;
}

/// One Hessian-vector product at x+. A zero gradient at x+ means x+ is
/// optimal and is reported as convergence.
inline Vec gnorm_grad(const StepCache& c, const Objective& obj, const ScalingPattern& p) {
  const double gn = detail::grad_norm_or_converged(c);
  const Vec& gp = c.plus_gradient();
  const double gpn = gp.norm();
  if (!(gpn > 0.0)) throw Error(ErrorCode::converged, "zero gradient at x+");
  Vec w = obj.hvp(c.x_plus, gp);
  return restrict_outer(w, c.gx, -1.0 / (gn * gpn), p);
}

// Hypergradient surrogate h_x(P) = (f(x+) - f(x)) / ||grad f(x)||^2.

inline double hyper_value(const StepCache& c) {
  const double gn = detail::grad_norm_or_converged(c);
  return (c.f_plus - c.fx) / (gn * gn);
}

inline Vec hyper_grad(const StepCache& c, const ScalingPattern& p) {
  const double gn = detail::grad_norm_or_converged(c);
  return restrict_outer(c.plus_gradient(), c.gx, -1.0 / (gn * gn), p);
}

}  // namespace osgm
