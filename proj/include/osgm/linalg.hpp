#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>

#include "osgm/error.hpp"

namespace osgm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_dim(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + " has size " + std::to_string(v.size()) + ", expected " +
                    std::to_string(n));
  }
}

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::non_finite, what);
}

/// Deterministic unit start vector for power iterations. Uses a fixed
/// low-discrepancy pattern so that no coordinate is exactly zero.
inline Vec power_start(Eigen::Index n, std::uint64_t salt = 0) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = std::fmod(0.6180339887498949 * static_cast<double>(i + 1 + salt), 1.0);
    v[i] = 0.5 + t;
  }
  return v / v.norm();
}

struct PowerResult {
  double value = 0.0;
  Vec vector;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration for the dominant eigenpair of a symmetric PSD operator.
/// Stops when the Rayleigh quotient changes by less than `rel_tol` relative.
inline PowerResult power_iteration(const std::function<Vec(const Vec&)>& op, Vec start,
                                   double rel_tol, int max_iters) {
  PowerResult out;
  Vec v = start / start.norm();
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Vec w = op(v);
    double next = v.dot(w);
    double nw = w.norm();
    out.iterations = it;
    if (nw == 0.0) {
      out.value = 0.0;
      out.vector = v;
      out.converged = true;
      return out;
    }
    v = w / nw;
    if (it > 1 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      out.converged = true;
      break;
    }
    lambda = next;
  }
  out.value = lambda;
  out.vector = v;
  return out;
}

/// Ascending eigenvalues of a symmetric matrix.
inline Vec sym_eigenvalues(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline bool is_symmetric(const Mat& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  double scale = 1.0 + a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void require_spd(const Mat& a, const char* what) {
  if (!is_symmetric(a) || !a.allFinite()) {
    throw Error(ErrorCode::not_spd, std::string(what) + " is not symmetric");
  }
  if (a.rows() == 0 || sym_eigenvalues(a)[0] <= 0.0) {
    throw Error(ErrorCode::not_spd, std::string(what) + " is not positive definite");
  }
}

/// Symmetric square root of an SPD matrix.
inline Mat spd_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace osgm
