#pragma once

#include <cmath>

#include "osgm/error.hpp"
#include "osgm/problems.hpp"
#include "osgm/surrogates.hpp"

namespace osgm {

enum class OracleKind { none, simple_comparison, line_search, steepest_descent };

/// Quantity a monotone oracle must not increase.
enum class Measure { fgap, gnorm };

struct LineSearchParams {
  double beta = 0.5;
  int max_halvings = 50;
};

/// Point chosen by the oracle together with its value and gradient.
struct OracleOutcome {
  Vec x;
  double fx = 0.0;
  Vec gx;
  bool accepted = false;  // false => the oracle returned x itself
  long grad_evals = 0;    // gradients evaluated inside the oracle
};

namespace detail {

inline OracleOutcome keep_current(const StepCache& c) { return {c.x, c.fx, c.gx, false, 0}; }

inline OracleOutcome take_plus(const StepCache& c) {
  return {c.x_plus, c.f_plus, c.plus_gradient(), true, 0};
}

}  // namespace detail

/// Monotone descent oracle for the step cached in `c`.
///
/// simple_comparison   x+ if phi(x+) <= phi(x) (ties accept x+), else x
/// line_search         x + a (x+ - x), a in {1, b, b^2, ...}, first with phi <= phi(x)
/// steepest_descent    exact minimizer along x+ - x (constant-Hessian objectives only);
///                     never worse than either x or x+
///
/// Comparisons use raw f values for the fgap measure since f* cancels.
/// The gradient at x+ must already be in the cache for the gnorm measure.
inline OracleOutcome monotone_oracle(OracleKind kind, Measure measure, StepCache& c,
                                     const Objective& obj, const LineSearchParams& ls = {}) {
  OracleOutcome out;
  switch (kind) {
    case OracleKind::none: {
      long evals = c.ensure_g_plus(obj) ? 1 : 0;
      out = detail::take_plus(c);
      out.grad_evals = evals;
      return out;
    }

    case OracleKind::simple_comparison: {
      if (measure == Measure::fgap) {
        if (!(c.f_plus <= c.fx)) return detail::keep_current(c);
        long evals = c.ensure_g_plus(obj) ? 1 : 0;
        out = detail::take_plus(c);
        out.grad_evals = evals;
        return out;
      }
      long evals = c.ensure_g_plus(obj) ? 1 : 0;
      out = c.plus_gradient().norm() <= c.gx.norm() ? detail::take_plus(c) : detail::keep_current(c);
      out.grad_evals = evals;
      return out;
    }

    case OracleKind::line_search: {
      long evals = 0;
      const Vec d = c.x_plus - c.x;
      const double phi0 = measure == Measure::fgap ? c.fx : c.gx.norm();
      double alpha = 1.0;
      for (int trial = 0; trial <= ls.max_halvings; ++trial) {
        if (trial == 0) {
          if (measure == Measure::gnorm && c.ensure_g_plus(obj)) ++evals;
          const double phi = measure == Measure::fgap ? c.f_plus : c.plus_gradient().norm();
          if (phi <= phi0) {
            if (c.ensure_g_plus(obj)) ++evals;
            out = detail::take_plus(c);
            out.grad_evals = evals;
            return out;
          }
        } else {
          Vec xa = c.x + alpha * d;
          double fa = obj.value(xa);
          if (measure == Measure::fgap) {
            if (fa <= phi0) {
              Vec ga = obj.grad(xa);
              ++evals;
              return {std::move(xa), fa, std::move(ga), true, evals};
            }
          } else {
            Vec ga = obj.grad(xa);
            ++evals;
            if (ga.norm() <= phi0) return {std::move(xa), fa, std::move(ga), true, evals};
          }
        }
        alpha *= ls.beta;
      }
      out = detail::keep_current(c);
      out.grad_evals = evals;
      return out;
    }

    case OracleKind::steepest_descent: {
      if (!obj.hessian_constant() || !obj.has_hvp()) {
        throw Error(ErrorCode::invalid_argument, "steepest-descent oracle needs a constant Hessian");
      }
      long evals = c.ensure_g_plus(obj) ? 1 : 0;
      const Vec d = c.x_plus - c.x;
      const Vec hd = obj.hvp(c.x, d);
      double alpha = 0.0;
      if (measure == Measure::fgap) {
        const double curv = d.dot(hd);
        if (curv > 0.0) alpha = -c.gx.dot(d) / curv;
      } else {
        const double curv = hd.squaredNorm();
        if (curv > 0.0) alpha = -c.gx.dot(hd) / curv;
      }
      Vec xa = c.x + alpha * d;
      const double fa = obj.value(xa);
      Vec ga = obj.grad(xa);
      ++evals;
      auto phi = [&](double f, const Vec& g) { return measure == Measure::fgap ? f : g.norm(); };
      const double phi_a = phi(fa, ga);
      const double phi_x = phi(c.fx, c.gx);
      const double phi_p = phi(c.f_plus, c.plus_gradient());
      if (phi_a <= phi_x && phi_a <= phi_p && alpha != 0.0) {
        return {std::move(xa), fa, std::move(ga), true, evals};
      }
      out = phi_p <= phi_x ? detail::take_plus(c) : detail::keep_current(c);
      out.grad_evals = evals;
      return out;
    }
  }
  return detail::keep_current(c);
}

}  // namespace osgm
