#include <gtest/gtest.h>

#include <cmath>

#include "osgm/osgm.hpp"

using namespace osgm;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Objective identity_quadratic(int n) {
  return make_objective<QuadraticInstance>(Mat(Mat::Identity(n, n)), Vec(Vec::Zero(n)));
}

Objective diag12_least_squares(const Vec& b) {
  return make_objective<LeastSquaresInstance>(Mat(vec({1.0, 2.0}).asDiagonal()), b);
}

Mat random_matrix(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Vec random_vec(Rng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Vec fd_gradient(const Objective& obj, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST(Objective, ValueExamples) {
  EXPECT_DOUBLE_EQ(identity_quadratic(2).value(vec({3.0, 4.0})), 12.5);
  EXPECT_DOUBLE_EQ(identity_quadratic(2).value(vec({0.0, 0.0})), 0.0);
  EXPECT_DOUBLE_EQ(diag12_least_squares(vec({1.0, 2.0})).value(vec({1.0, 1.0})), 0.0);
}

TEST(Objective, GradientExamples) {
  EXPECT_EQ(identity_quadratic(2).grad(vec({3.0, 4.0})), vec({3.0, 4.0}));
  EXPECT_EQ(diag12_least_squares(vec({0.0, 0.0})).grad(vec({1.0, 1.0})), vec({1.0, 4.0}));

  SparseRows x(1, 2);
  x.insert(0, 0) = 1.0;
  // Margin 2 > 1: the hinge is inactive and only the ridge term remains.
  auto svm = make_objective<SvmSquaredHingeInstance>(x, vec({1.0}), 0.25);
  EXPECT_EQ(svm.grad(vec({2.0, 0.0})), vec({0.5, 0.0}));
}

TEST(Objective, HvpExamples) {
  EXPECT_EQ(identity_quadratic(2).hvp(vec({5.0, -1.0}), vec({1.0, 2.0})), vec({1.0, 2.0}));
  EXPECT_EQ(diag12_least_squares(vec({0.0, 0.0})).hvp(vec({0.0, 0.0}), vec({1.0, 1.0})),
            vec({1.0, 4.0}));

  SparseRows x(1, 2);
  x.insert(0, 0) = 1.0;
  auto svm = make_objective<SvmSquaredHingeInstance>(x, vec({1.0}), 0.1);
  EXPECT_FALSE(svm.has_hvp());
  try {
    svm.hvp(vec({0.0, 0.0}), vec({1.0, 0.0}));
    FAIL() << "expected hvp_unavailable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::hvp_unavailable);
  }
}

TEST(Objective, ConstantsExamples) {
  auto eye = make_objective<LeastSquaresInstance>(Mat(Mat::Identity(3, 3)), Vec(Vec::Ones(3)));
  EXPECT_NEAR(eye.smoothness(), 1.0, 1e-12);
  EXPECT_NEAR(eye.strong_convexity(), 1.0, 1e-12);

  auto ls = diag12_least_squares(vec({1.0, 1.0}));
  EXPECT_NEAR(ls.smoothness(), 4.0, 1e-12);
  EXPECT_NEAR(ls.strong_convexity(), 1.0, 1e-12);
  auto est = estimate_constants(ls);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.smoothness, 4.0, 1e-6);
  EXPECT_NEAR(est.strong_convexity, 1.0, 1e-6);

  // X = 0 leaves the pure ridge term.
  SparseRows zero(3, 2);
  auto ridge = make_objective<SvmSquaredHingeInstance>(zero, vec({1.0, -1.0, 1.0}), 0.3);
  EXPECT_DOUBLE_EQ(ridge.smoothness(), 0.3);
  EXPECT_DOUBLE_EQ(ridge.strong_convexity(), 0.3);
  auto ridge_est = estimate_constants(ridge);
  EXPECT_DOUBLE_EQ(ridge_est.smoothness, 0.3);
  EXPECT_DOUBLE_EQ(ridge_est.strong_convexity, 0.3);
}

TEST(Objective, StableGapMatchesValueMinusOptimum) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 5;
    Mat a = random_matrix(rng, n + 2, n);
    Vec b = random_vec(rng, n + 2);
    auto ls = make_objective<LeastSquaresInstance>(a, b);
    Vec x = random_vec(rng, n);
    EXPECT_NEAR(*ls.gap(x), ls.value(x) - *ls.f_star(), 1e-10 * (1.0 + ls.value(x)));
    EXPECT_GE(*ls.gap(x), 0.0);
    // The gradient vanishes at the reported minimizer.
    const auto& model = dynamic_cast<const LeastSquaresInstance&>(ls.model());
    EXPECT_LT(ls.grad(model.x_star()).norm(), 1e-9);
  }
}

TEST(Objective, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 6;
    std::vector<Objective> objs;
    Mat m = random_matrix(rng, n, n);
    objs.push_back(make_objective<QuadraticInstance>(Mat(m * m.transpose() + Mat::Identity(n, n)),
                                                     random_vec(rng, n), rng.normal()));
    objs.push_back(make_objective<LeastSquaresInstance>(random_matrix(rng, n + 3, n), random_vec(rng, n + 3)));
    SparseRows x(6, n);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < n; ++j)
        if (rng.uniform() < 0.6) x.insert(i, j) = rng.normal();
    Vec y(6);
    for (int i = 0; i < 6; ++i) y[i] = i % 2 ? 1.0 : -1.0;
    objs.push_back(make_objective<SvmSquaredHingeInstance>(x, y, 0.1));

    for (const auto& obj : objs) {
      Vec pt = random_vec(rng, n);
      Vec g = obj.grad(pt);
      Vec fd = fd_gradient(obj, pt);
      EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, g.norm())) << obj.name();
      if (obj.has_hvp()) {
        Vec v = random_vec(rng, n);
        const double h = 1e-6;
        Vec fd_hv = (obj.grad(pt + h * v) - obj.grad(pt - h * v)) / (2.0 * h);
        EXPECT_LE((obj.hvp(pt, v) - fd_hv).norm(), 1e-6 * std::max(1.0, fd_hv.norm()));
      }
    }
  }
}

TEST(Objective, SvmSmoothnessBoundsCurvature) {
  // The gradient is L-Lipschitz with the reported L.
  Rng rng(12);
  SparseRows x(20, 5);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 5; ++j)
      if (rng.uniform() < 0.5) x.insert(i, j) = rng.normal();
  Vec y(20);
  for (int i = 0; i < 20; ++i) y[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  auto svm = make_objective<SvmSquaredHingeInstance>(x, y, 0.05);
  EXPECT_TRUE(dynamic_cast<const SvmSquaredHingeInstance&>(svm.model()).smoothness_converged());
  for (int t = 0; t < 50; ++t) {
    Vec a = random_vec(rng, 5), b = random_vec(rng, 5);
    EXPECT_LE((svm.grad(a) - svm.grad(b)).norm(), svm.smoothness() * (a - b).norm() * (1 + 1e-9));
  }
}

TEST(Objective, RejectsBadInput) {
  auto ls = diag12_least_squares(vec({1.0, 1.0}));
  try {
    ls.value(vec({1.0, 2.0, 3.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
  try {
    ls.grad(vec({1.0, std::nan("")}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite);
  }
  EXPECT_THROW(make_objective<QuadraticInstance>(Mat(vec({1.0, -1.0}).asDiagonal()), vec({0.0, 0.0})),
               Error);
  SparseRows x(1, 1);
  x.insert(0, 0) = 1.0;
  EXPECT_THROW(make_objective<SvmSquaredHingeInstance>(x, vec({0.5}), 0.1), Error);
  EXPECT_THROW(make_objective<SvmSquaredHingeInstance>(x, vec({1.0}), 0.0), Error);
}

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    differs = differs || va != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, NormalMoments) {
  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / m, 0.0, 0.01);
  EXPECT_NEAR(sq / m, 1.0, 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(PowerIteration, FindsExtremeEigenvalue) {
  Mat a = vec({1.0, 3.0, 7.0}).asDiagonal();
  auto r = power_iteration([&](const Vec& v) -> Vec { return a * v; }, power_start(3), 1e-12, 1000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 7.0, 1e-9);
}
