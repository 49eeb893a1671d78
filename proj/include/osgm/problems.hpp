#pragma once

#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"

namespace osgm {

struct ObjectiveConstants {
  double smoothness = 0.0;                       // L
  double strong_convexity = 0.0;                 // mu
  std::optional<double> hessian_lipschitz;       // H, nullopt when unknown
  std::optional<double> f_star;                  // nullopt when unknown
  bool hessian_constant = false;
};

/// Backing implementation of an objective. Implementations are immutable
/// after construction, so one model may be evaluated from many threads.
class ObjectiveModel {
 public:
  virtual ~ObjectiveModel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec grad(const Vec& x) const = 0;
  virtual bool has_hvp() const { return false; }
  virtual Vec hvp(const Vec& /*x*/, const Vec& /*v*/) const {
    throw Error(ErrorCode::hvp_unavailable, "objective is not twice differentiable");
  }
  /// Hessian matrix when it does not depend on x.
  virtual std::optional<Mat> constant_hessian() const { return std::nullopt; }
  /// f(x) - f* computed without cancellation, when the model can.
  virtual std::optional<double> stable_gap(const Vec& /*x*/) const { return std::nullopt; }
  virtual const ObjectiveConstants& constants() const = 0;
  virtual std::string name() const = 0;
};

/// Evaluation bundle handed to solvers. Cheap to copy; shares the model.
class Objective {
 public:
  Objective() = default;
  explicit Objective(std::shared_ptr<const ObjectiveModel> model) : model_(std::move(model)) {}

  Eigen::Index dim() const { return model_->dim(); }
  const ObjectiveConstants& constants() const { return model_->constants(); }
  double smoothness() const { return constants().smoothness; }
  double strong_convexity() const { return constants().strong_convexity; }
  std::optional<double> f_star() const { return constants().f_star; }
  bool has_hvp() const { return model_->has_hvp(); }
  bool hessian_constant() const { return constants().hessian_constant; }
  std::optional<Mat> constant_hessian() const { return model_->constant_hessian(); }
  std::string name() const { return model_->name(); }
  const ObjectiveModel& model() const { return *model_; }

  double value(const Vec& x) const {
    check(x, "x");
    return model_->value(x);
  }

  Vec grad(const Vec& x) const {
    check(x, "x");
    return model_->grad(x);
  }

  Vec hvp(const Vec& x, const Vec& v) const {
    if (!model_->has_hvp()) {
      throw Error(ErrorCode::hvp_unavailable, model_->name() + " declares no Hessian-vector product");
    }
    check(x, "x");
    check(v, "v");
    return model_->hvp(x, v);
  }

  /// f(x) - f*, or nullopt when f* is unknown.
  std::optional<double> gap(const Vec& x) const {
    check(x, "x");
    if (auto g = model_->stable_gap(x)) return g;
    if (auto fs = f_star()) return model_->value(x) - *fs;
    return std::nullopt;
  }

 private:
  void check(const Vec& v, const char* what) const {
    require_dim(v, model_->dim(), what);
    require_finite(v, what);
  }

  std::shared_ptr<const ObjectiveModel> model_;
};

/// f(x) = 1/2 ||Ax - b||^2 with dense A.
class LeastSquaresInstance final : public ObjectiveModel {
 public:
  LeastSquaresInstance(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size() || a_.cols() == 0) {
      throw Error(ErrorCode::dimension_mismatch, "least squares needs A rows == len(b)");
    }
    if (!a_.allFinite() || !b_.allFinite()) throw Error(ErrorCode::non_finite, "least squares data");
    hessian_ = a_.transpose() * a_;
    Vec eig = sym_eigenvalues(hessian_);
    consts_.smoothness = eig[eig.size() - 1];
    consts_.strong_convexity = std::max(eig[0], 0.0);
    consts_.hessian_lipschitz = 0.0;
    consts_.hessian_constant = true;
    Eigen::LLT<Mat> llt(hessian_);
    if (llt.info() == Eigen::Success && consts_.strong_convexity > 0.0) {
      x_star_ = llt.solve(a_.transpose() * b_);
    } else {
      x_star_ = a_.completeOrthogonalDecomposition().solve(b_);
    }
    consts_.f_star = 0.5 * (a_ * x_star_ - b_).squaredNorm();
  }

  const Mat& a() const { return a_; }
  const Vec& b() const { return b_; }
  const Vec& x_star() const { return x_star_; }
  const Mat& hessian() const { return hessian_; }

  Eigen::Index dim() const override { return a_.cols(); }
  double value(const Vec& x) const override { return 0.5 * (a_ * x - b_).squaredNorm(); }
  Vec grad(const Vec& x) const override { return a_.transpose() * (a_ * x - b_); }
  bool has_hvp() const override { return true; }
  Vec hvp(const Vec& /*x*/, const Vec& v) const override { return a_.transpose() * (a_ * v); }
  std::optional<Mat> constant_hessian() const override { return hessian_; }
  std::optional<double> stable_gap(const Vec& x) const override {
    return 0.5 * (a_ * (x - x_star_)).squaredNorm();
  }
  const ObjectiveConstants& constants() const override { return consts_; }
  std::string name() const override { return "least_squares"; }

 private:
  Mat a_;
  Vec b_;
  Mat hessian_;
  Vec x_star_;
  ObjectiveConstants consts_;
};

/// f(x) = 1/2 x'Hx - c'x + offset with SPD H.
class QuadraticInstance final : public ObjectiveModel {
 public:
  QuadraticInstance(Mat h, Vec c, double offset = 0.0)
      : h_(std::move(h)), c_(std::move(c)), offset_(offset) {
    if (h_.rows() != h_.cols() || h_.rows() != c_.size()) {
      throw Error(ErrorCode::dimension_mismatch, "quadratic needs square H matching c");
    }
    require_spd(h_, "quadratic Hessian");
    Vec eig = sym_eigenvalues(h_);
    consts_.smoothness = eig[eig.size() - 1];
    consts_.strong_convexity = eig[0];
    consts_.hessian_lipschitz = 0.0;
    consts_.hessian_constant = true;
    x_star_ = h_.llt().solve(c_);
    consts_.f_star = value(x_star_);
  }

  const Mat& hessian() const { return h_; }
  const Vec& x_star() const { return x_star_; }

  Eigen::Index dim() const override { return h_.rows(); }
  double value(const Vec& x) const override { return 0.5 * x.dot(h_ * x) - c_.dot(x) + offset_; }
  Vec grad(const Vec& x) const override { return h_ * x - c_; }
  bool has_hvp() const override { return true; }
  Vec hvp(const Vec& /*x*/, const Vec& v) const override { return h_ * v; }
  std::optional<Mat> constant_hessian() const override { return h_; }
  std::optional<double> stable_gap(const Vec& x) const override {
    Vec d = x - x_star_;
    return 0.5 * d.dot(h_ * d);
  }
  const ObjectiveConstants& constants() const override { return consts_; }
  std::string name() const override { return "quadratic"; }

 private:
  Mat h_;
  Vec c_;
  double offset_;
  Vec x_star_;
  ObjectiveConstants consts_;
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// f(x) = (1/m) sum_i max(0, 1 - y_i <x_i, x>)^2 + (lambda/2) ||x||^2.
///
/// Once but not twice differentiable, so no Hessian-vector product is offered.
/// L is the closed-form bound lambda + (2/m) sigma_max(X)^2 with sigma_max
/// from power iteration on X'X.
class SvmSquaredHingeInstance final : public ObjectiveModel {
 public:
  SvmSquaredHingeInstance(SparseRows x, Vec y, double lambda)
      : x_(std::move(x)), y_(std::move(y)), lambda_(lambda) {
    if (x_.rows() != y_.size() || x_.rows() == 0 || x_.cols() == 0) {
      throw Error(ErrorCode::dimension_mismatch, "svm needs one label per row");
    }
    if (!(lambda_ > 0.0)) throw Error(ErrorCode::invalid_argument, "svm needs lambda > 0");
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      if (y_[i] != 1.0 && y_[i] != -1.0) {
        throw Error(ErrorCode::invalid_argument, "svm labels must be +1 or -1");
      }
    }
    xt_ = x_.transpose();
    auto sigma = top_gram_eigenvalue();
    sigma_converged_ = sigma.converged;
    consts_.smoothness = lambda_ + 2.0 / static_cast<double>(x_.rows()) * sigma.value;
    consts_.strong_convexity = lambda_;
    consts_.hessian_constant = false;
  }

  const SparseRows& features() const { return x_; }
  const Vec& labels() const { return y_; }
  double lambda() const { return lambda_; }
  bool smoothness_converged() const { return sigma_converged_; }

  /// Largest eigenvalue of X'X by power iteration (rel tol 1e-8, 10n iterations).
  PowerResult top_gram_eigenvalue() const {
    const auto n = x_.cols();
    return power_iteration([this](const Vec& v) -> Vec { return xt_ * (x_ * v); }, power_start(n),
                           1e-8, static_cast<int>(10 * n));
  }

  Eigen::Index dim() const override { return x_.cols(); }

  double value(const Vec& w) const override {
    Vec margin = (x_ * w).cwiseProduct(y_);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      double r = std::max(0.0, 1.0 - margin[i]);
      loss += r * r;
    }
    return loss / static_cast<double>(y_.size()) + 0.5 * lambda_ * w.squaredNorm();
  }

  Vec grad(const Vec& w) const override {
    Vec margin = (x_ * w).cwiseProduct(y_);
    Vec coef(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      coef[i] = -2.0 * std::max(0.0, 1.0 - margin[i]) * y_[i];
    }
    return xt_ * coef / static_cast<double>(y_.size()) + lambda_ * w;
  }

  const ObjectiveConstants& constants() const override { return consts_; }
  std::string name() const override { return "svm_squared_hinge"; }

 private:
  SparseRows x_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> xt_;
  Vec y_;
  double lambda_;
  bool sigma_converged_ = false;
  ObjectiveConstants consts_;
};

template <class Model, class... Args>
Objective make_objective(Args&&... args) {
  return Objective(std::make_shared<const Model>(std::forward<Args>(args)...));
}

struct ConstantsEstimate {
  double smoothness = 0.0;
  double strong_convexity = 0.0;
  bool converged = true;  // false => best estimate, iteration budget ran out
};

/// Estimates (L, mu) independently of the values cached on the model.
///
/// Constant-Hessian objectives use power iteration on the Hessian for L and
/// inverse power iteration for mu. The SVM uses its closed-form bound for L
/// and lambda for mu. Power iterations stop at relative tolerance 1e-8 or
/// after 10n iterations.
inline ConstantsEstimate estimate_constants(const Objective& obj) {
  ConstantsEstimate out;
  const auto n = obj.dim();
  const int max_iters = static_cast<int>(10 * n);
  if (auto* svm = dynamic_cast<const SvmSquaredHingeInstance*>(&obj.model())) {
    auto top = svm->top_gram_eigenvalue();
    out.smoothness = svm->lambda() + 2.0 / static_cast<double>(svm->features().rows()) * top.value;
    out.strong_convexity = svm->lambda();
    out.converged = top.converged;
    return out;
  }
  auto hess = obj.constant_hessian();
  if (!hess) throw Error(ErrorCode::not_applicable, "no closed-form constants for " + obj.name());
  const Mat& h = *hess;
  auto top = power_iteration([&h](const Vec& v) -> Vec { return h * v; }, power_start(n), 1e-8,
                             max_iters);
  out.smoothness = top.value;
  out.converged = top.converged;
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) {
    out.strong_convexity = 0.0;
    return out;
  }
  auto inv = power_iteration([&llt](const Vec& v) -> Vec { return llt.solve(v); },
                             power_start(n, 7), 1e-8, max_iters);
  out.strong_convexity = inv.value > 0.0 ? 1.0 / inv.value : 0.0;
  out.converged = out.converged && inv.converged;
  return out;
}

}  // namespace osgm
