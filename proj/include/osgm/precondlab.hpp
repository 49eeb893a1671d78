#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"

namespace osgm {

namespace detail {

/// Eigenvalues (ascending) of P^{1/2} A P^{1/2} for a diagonal P = diag(d).
inline Vec scaled_spectrum(const Mat& a, const Vec& d) {
  const Vec s = d.cwiseSqrt();
  Mat m = s.asDiagonal() * a * s.asDiagonal();
  m = (0.5 * (m + m.transpose())).eval();
  return sym_eigenvalues(m);
}

inline void require_positive(const Vec& d, const char* what) {
  if (!d.allFinite() || d.size() == 0 || d.minCoeff() <= 0.0) {
    throw Error(ErrorCode::not_spd, std::string(what) + " must have positive entries");
  }
}

}  // namespace detail

/// lambda_max / lambda_min of P^{1/2} A P^{1/2}.
inline double kappa_of(const Mat& a, const Mat& p) {
  require_spd(a, "A");
  require_spd(p, "P");
  if (a.rows() != p.rows()) throw Error(ErrorCode::dimension_mismatch, "A and P differ in size");
  const Mat s = spd_sqrt(p);
  Mat m = s * a * s;
  m = (0.5 * (m + m.transpose())).eval();
  const Vec ev = sym_eigenvalues(m);
  if (ev[0] <= 0.0) throw Error(ErrorCode::not_spd, "P^{1/2} A P^{1/2} is not positive definite");
  return ev[ev.size() - 1] / ev[0];
}

/// kappa_of for P = diag(d).
inline double kappa_of_diagonal(const Mat& a, const Vec& d) {
  require_spd(a, "A");
  detail::require_positive(d, "d");
  require_dim(d, a.rows(), "d");
  const Vec ev = detail::scaled_spectrum(a, d);
  return ev[ev.size() - 1] / ev[0];
}

inline double kappa_of(const Mat& a) {
  require_spd(a, "A");
  const Vec ev = sym_eigenvalues(a);
  return ev[ev.size() - 1] / ev[0];
}

struct OptimalDiagonal {
  Vec d;                       // normalized so that diag(d) <= A^{-1} is tight
  double kappa_star_ub = 0.0;  // kappa of diag(d), an upper bound on the diagonal optimum
  double feasibility_margin = 0.0;
  int bisection_levels = 0;
};

struct OptimalDiagonalParams {
  int levels = 30;
  int steps_per_level = 200;
  Eigen::Index max_dim = 500;
};

/// Searches for a diagonal d maximizing tau subject to
/// tau A^{-1} <= diag(d) <= A^{-1}.
///
/// Starts from Jacobi scaling and bisects on tau. For each trial tau,
/// projected supergradient steps on the smaller eigenvalue slack of the two
/// constraints look for a feasible d. Every iterate is certified by rescaling
/// it with 1/lambda_max(D^{1/2} A D^{1/2}), which makes diag(d) <= A^{-1}
/// tight; only certified improvements replace the incumbent, so the result is
/// never worse than Jacobi. No optimality claim.
inline OptimalDiagonal approx_optimal_diagonal(const Mat& a, const OptimalDiagonalParams& prm = {}) {
  if (a.rows() > prm.max_dim) {
    throw Error(ErrorCode::too_large, "approx_optimal_diagonal supports n <= " +
                                          std::to_string(prm.max_dim));
  }
  require_spd(a, "A");
  const Eigen::Index n = a.rows();
  const Mat a_inv = a.llt().solve(Mat::Identity(n, n));

  // Rescales d onto the boundary of diag(d) <= A^{-1}; returns the certified tau.
  auto normalize = [&](Vec& d) {
    const Vec ev = detail::scaled_spectrum(a, d);
    d /= ev[n - 1];
    return ev[0] / ev[n - 1];
  };

  Vec best = a.diagonal().cwiseInverse();
  double best_tau = normalize(best);

  double lo = best_tau;
  double hi = 1.0;
  OptimalDiagonal out;
  for (int level = 0; level < prm.levels && hi - lo > 1e-12 * hi; ++level) {
    out.bisection_levels = level + 1;
    const double tau = 0.5 * (lo + hi);
    Vec d = best;
    bool feasible = false;
    for (int t = 0; t < prm.steps_per_level; ++t) {
      // psi(d) = min{lambda_min(D - tau A^{-1}), lambda_min(A^{-1} - D)} is
      // concave; psi >= 0 certifies tau. Polyak step toward psi = 0.
      Mat lower = d.asDiagonal();
      lower -= tau * a_inv;
      Mat upper = a_inv;
      upper -= Mat(d.asDiagonal());
      Eigen::SelfAdjointEigenSolver<Mat> el(lower);
      Eigen::SelfAdjointEigenSolver<Mat> eu(upper);
      const double psi_l = el.eigenvalues()[0];
      const double psi_u = eu.eigenvalues()[0];
      const Vec g = psi_l <= psi_u ? Vec(el.eigenvectors().col(0).cwiseAbs2())
                                   : Vec(-eu.eigenvectors().col(0).cwiseAbs2());
      const double psi = std::min(psi_l, psi_u);
      if (psi >= 0.0) {
        feasible = true;
        break;
      }
      d -= (psi / g.squaredNorm()) * g;
      d = d.cwiseMax(1e-300);
      Vec certified_d = d;
      const double certified = normalize(certified_d);
      if (certified > best_tau) {
        best_tau = certified;
        best = certified_d;
      }
      if (certified >= tau) {
        feasible = true;
        break;
      }
    }
    if (feasible) lo = std::max(tau, best_tau);
    else hi = tau;
  }

  out.d = best;
  out.kappa_star_ub = 1.0 / best_tau;
  Mat upper = a_inv;
  upper -= Mat(best.asDiagonal());
  Mat lower = best.asDiagonal();
  lower -= best_tau * a_inv;
  out.feasibility_margin = std::min(sym_eigenvalues(0.5 * (upper + upper.transpose()))[0],
                                    sym_eigenvalues(0.5 * (lower + lower.transpose()))[0]);
  return out;
}

struct PatternScore {
  Mat score;  // |v_max v_max^T - v_min v_min^T|
  std::vector<std::pair<Eigen::Index, Eigen::Index>> mask;  // top-k, 0-based (row, col)
  bool converged = true;
};

/// Extremal eigenvectors by power iteration (v_max) and by power iteration
/// on lambda_max I - A (v_min), tolerance 1e-10. With repeated extremal
/// eigenvalues the vectors depend on the fixed start vectors.
inline PatternScore pattern_score(const Mat& a, Eigen::Index k) {
  require_spd(a, "A");
  const Eigen::Index n = a.rows();
  if (k < 0 || k > n * n) throw Error(ErrorCode::invalid_argument, "k must lie in [0, n^2]");
  const int max_iters = static_cast<int>(std::max<Eigen::Index>(1000, 100 * n));
  PowerResult top = power_iteration([&](const Vec& v) { return Vec(a * v); }, power_start(n, 0),
                                    1e-10, max_iters);
  const double shift = top.value;
  PowerResult bottom = power_iteration([&](const Vec& v) { return Vec(shift * v - a * v); },
                                       power_start(n, 7), 1e-10, max_iters);
  PatternScore out;
  out.converged = top.converged && bottom.converged;
  out.score = (top.vector * top.vector.transpose() - bottom.vector * bottom.vector.transpose())
                  .cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n * n));
  std::iota(order.begin(), order.end(), 0);
  // Row-major linear index; stable sort keeps row-major order among ties.
  auto at = [&](Eigen::Index idx) { return out.score(idx / n, idx % n); };
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return at(x) > at(y); });
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index idx = order[static_cast<std::size_t>(i)];
    out.mask.emplace_back(idx / n, idx % n);
  }
  return out;
}

struct MinimaxReport {
  Vec d_kappa;             // grid argmin of kappa(diag(d))
  Vec d_ratio;             // grid argmin of max_x r_x(diag(d))
  double kappa_min = 0.0;
  double ratio_min = 0.0;  // worst-case ratio at d_ratio
  double grid_spacing = 0.0;     // grid step in log(d1/d2)
  double distance_cells = 0.0;   // |log(d1/d2) difference| in grid steps
};

/// Worst-case one-step ratio (f(x+) - f*)/(f(x) - f*) over x for the
/// quadratic with Hessian A under x+ = x - diag(d) grad f(x).
inline double worst_case_ratio(const Mat& a, const Vec& d) {
  const Vec m = detail::scaled_spectrum(a, d);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) worst = std::max(worst, (1.0 - m[i]) * (1.0 - m[i]));
  return worst;
}

/// Exhaustive comparison on a 200x200 log grid of diagonal scalings between
/// the minimizer of kappa and the minimizer of the worst-case ratio. Each
/// coordinate ranges over (1/A_ii) * 10^[-2, 2].
inline MinimaxReport minimax_check_2x2(const Mat& a, int grid = 200) {
  if (a.rows() != 2 || a.cols() != 2) throw Error(ErrorCode::invalid_argument, "need a 2x2 matrix");
  require_spd(a, "A");
  const double span = 4.0 * std::log(10.0);
  const double h = span / (grid - 1);
  auto coord = [&](int axis, int i) {
    return std::exp(-0.5 * span + h * i) / a(axis, axis);
  };
  MinimaxReport rep;
  rep.kappa_min = std::numeric_limits<double>::infinity();
  rep.ratio_min = std::numeric_limits<double>::infinity();
  Vec d(2);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      d << coord(0, i), coord(1, j);
      const Vec m = detail::scaled_spectrum(a, d);
      const double kappa = m[1] / m[0];
      const double ratio = std::max((1.0 - m[0]) * (1.0 - m[0]), (1.0 - m[1]) * (1.0 - m[1]));
      if (kappa < rep.kappa_min) {
        rep.kappa_min = kappa;
        rep.d_kappa = d;
      }
      if (ratio < rep.ratio_min) {
        rep.ratio_min = ratio;
        rep.d_ratio = d;
      }
    }
  }
  rep.grid_spacing = h;
  const double lk = std::log(rep.d_kappa[0] / rep.d_kappa[1]);
  const double lr = std::log(rep.d_ratio[0] / rep.d_ratio[1]);
  rep.distance_cells = std::abs(lk - lr) / h;
  return rep;
}

struct HindsightReport {
  double kappa = 0.0;
  double kappa_jacobi = 0.0;
  double kappa_star_ub = 0.0;
  Vec diag_precond;
  double feasibility_margin = 0.0;
  double omega_star = 0.0;   // ||I - c A diag(d)||_2, c = 2/(lambda_min + lambda_max)
  double lambda_star = 0.0;  // 1/(1 - omega_star)
  PatternScore pattern;
};

/// Condition numbers, the certified diagonal preconditioner, the
/// gradient-norm constants of that candidate and the top-k sparsity score.
inline HindsightReport hindsight_report(const Mat& a, Eigen::Index top_k) {
  HindsightReport rep;
  rep.kappa = kappa_of(a);
  rep.kappa_jacobi = kappa_of_diagonal(a, a.diagonal().cwiseInverse());
  OptimalDiagonal opt = approx_optimal_diagonal(a);
  rep.kappa_star_ub = opt.kappa_star_ub;
  rep.diag_precond = opt.d;
  rep.feasibility_margin = opt.feasibility_margin;
  const Vec m = detail::scaled_spectrum(a, opt.d);
  const double c = 2.0 / (m[0] + m[m.size() - 1]);
  const Eigen::Index n = a.rows();
  Mat t = Mat::Identity(n, n) - c * a * opt.d.asDiagonal();
  Eigen::JacobiSVD<Mat> svd(t);
  // I - cA diag(d) is not symmetric and its norm can exceed 1; P = I/L is also
  // diagonal and gives 1 - 1/kappa, so the smaller of the two bounds omega*.
  rep.omega_star = std::min(svd.singularValues()[0], 1.0 - 1.0 / rep.kappa);
  rep.lambda_star = rep.omega_star < 1.0 ? 1.0 / (1.0 - rep.omega_star)
                                         : std::numeric_limits<double>::infinity();
  rep.pattern = pattern_score(a, std::min<Eigen::Index>(top_k, n * n));
  return rep;
}

}  // namespace osgm
