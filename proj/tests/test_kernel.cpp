#include "rkhs/data.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/kernel_ops.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rkhs;

namespace {

PointSet uniform(Index n, Index d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrix m(n, d);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return PointSet(m);
}

// Pairwise kernel evaluations through operator(), independent of gram().
Matrix slow_gram(const ScaledKernel& k, const PointSet& x, const PointSet& y) {
  Matrix g(x.size(), y.size());
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = 0; j < y.size(); ++j) g(i, j) = k(x.point(i), y.point(j));
  return g;
}

Matrix perturbed(const PointSet& z, Index i, Index d, double h) {
  Matrix m = z.matrix();
  m(i, d) += h;
  return m;
}

class BothFamilies : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST(Scaling, TwoPointUnitInterval) {
  RowMatrix m(2, 1);
  m << 0.0, 1.0;
  const PointSet x(m);
  const ScaledKernel k = fit_scaling(x, x, "gaussian");
  EXPECT_DOUBLE_EQ(k.lower()(0), 0.0);
  EXPECT_DOUBLE_EQ(k.range()(0), 1.0);
  EXPECT_DOUBLE_EQ(k.alpha(), 0.5);
  const RowMatrix u = k.to_unit_cube(x);
  EXPECT_EQ(u(0, 0), 0.0);
  EXPECT_EQ(u(1, 0), 1.0);
}

TEST(Scaling, MaternAlphaIsMeanL1Distance) {
  const PointSet x = uniform(12, 3, 1);
  const PointSet y = uniform(9, 3, 2);
  ScalingOptions o;
  o.use_erfinv = false;
  const ScaledKernel k = fit_scaling(x, y, "matern-l1", o);
  const RowMatrix ux = k.to_unit_cube(x), uy = k.to_unit_cube(y);
  double s = 0.0;
  for (Index i = 0; i < ux.rows(); ++i)
    for (Index j = 0; j < uy.rows(); ++j) s += (ux.row(i) - uy.row(j)).lpNorm<1>();
  EXPECT_NEAR(k.alpha(), s / (12.0 * 9.0), 1e-14);
}

TEST(Scaling, DegenerateFeatureMapsToCenter) {
  RowMatrix m(3, 2);
  m << 1, 5, 2, 5, 3, 5;
  const PointSet x(m);
  const ScaledKernel k = fit_scaling(x, x, "gaussian");
  const RowMatrix u = k.to_unit_cube(x);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(u(i, 1), 0.5);
}

TEST(Registry, TagsAndUnknown) {
  EXPECT_EQ(make_kernel("gaussian")->tag(), "gaussian");
  EXPECT_EQ(make_kernel("matern-l1")->tag(), "matern-l1");
  EXPECT_THROW(make_kernel("nope"), Error);
}

TEST(Gram, SymmetricWithUnitDiagonal) {
  const PointSet x = uniform(10, 3, 3);
  for (const char* fam : {"gaussian", "matern-l1"}) {
    const ScaledKernel k = fit_scaling(x, x, fam);
    const Matrix g = gram(k, x, x);
    EXPECT_EQ((g - g.transpose()).norm(), 0.0);
    for (Index i = 0; i < 10; ++i) EXPECT_EQ(g(i, i), 1.0);
    EXPECT_LE((g - slow_gram(k, x, x)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Gram, TwoByTwoGaussian) {
  const double d = 0.7;
  RowMatrix m(2, 1);
  m << 0.0, d;
  const PointSet x(m);
  const Matrix g = gram(ScaledKernel::unscaled("gaussian", 1), x, x);
  EXPECT_DOUBLE_EQ(g(0, 1), std::exp(-d * d));
  EXPECT_DOUBLE_EQ(g(1, 0), std::exp(-d * d));
  EXPECT_DOUBLE_EQ(g(0, 0), 1.0);
}

TEST_P(BothFamilies, ExtrapolationReproducesTargets) {
  const PointSet x = uniform(16, 2, 4);
  const ScaledKernel k = fit_scaling(x, x, GetParam());
  Matrix fx(16, 2);
  fx.col(0) = x.matrix().col(0) + x.matrix().col(1);
  fx.col(1) = x.matrix().col(0).array().sin();
  const Regressor r = fit(k, x, fx);
  EXPECT_EQ(r.mode(), FitMode::Extrapolation);
  EXPECT_LE((predict(r, x) - fx).norm() / fx.norm(), 1e-8);
}

TEST_P(BothFamilies, NearbyPredictionsMatchDenseSolve) {
  const PointSet x = uniform(16, 2, 5);
  const ScaledKernel k = fit_scaling(x, x, GetParam());
  const Matrix fx = x.matrix().col(0) + x.matrix().col(1);
  const Regressor r = fit(k, x, fx);
  const PointSet z = PointSet::from(x.matrix().array() + 1e-3);
  const Matrix theta = slow_gram(k, x, x).fullPivLu().solve(fx);
  const Matrix oracle = slow_gram(k, z, x) * theta;
  EXPECT_LE((predict(r, z) - oracle).norm() / oracle.norm(), 1e-6);
}

TEST_P(BothFamilies, SinglePoint) {
  RowMatrix m(1, 2);
  m << 0.3, 0.4;
  const PointSet x(m);
  const ScaledKernel k = ScaledKernel::unscaled(GetParam(), 2);
  const Matrix fx = Matrix::Constant(1, 1, 2.5);
  const Regressor r = fit(k, x, fx);
  EXPECT_DOUBLE_EQ(r.theta()(0, 0), 2.5 / k(x.point(0), x.point(0)));
  const PointSet z = uniform(5, 2, 6);
  const Matrix p = predict(r, z);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(p(i, 0), 2.5 * k(z.point(i), x.point(0)), 1e-15);
}

TEST_P(BothFamilies, ConstantFunction) {
  const PointSet x = uniform(20, 2, 7);
  const ScaledKernel k = fit_scaling(x, x, GetParam());
  const Matrix fx = Matrix::Constant(20, 1, 3.0);
  const Regressor r = fit(k, x, fx);
  EXPECT_LE((predict(r, x).array() - 3.0).abs().maxCoeff(), 3e-8);
  const PointSet z = uniform(10, 2, 8, 0.2, 0.8);
  const Matrix oracle = slow_gram(k, z, x) * slow_gram(k, x, x).fullPivLu().solve(fx);
  EXPECT_LE((predict(r, z) - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_P(BothFamilies, RidgeAndLeastSquaresMatchSvd) {
  const PointSet x = uniform(30, 2, 9);
  const ScaledKernel k = fit_scaling(x, x, GetParam());
  const Matrix fx = x.matrix().col(0).array().square().matrix();
  const Index ids[] = {0, 3, 7, 11, 19, 25};
  const PointSet y = x.select(ids);
  const Matrix kxy = slow_gram(k, x, y);

  const Regressor ls = fit(k, x, y, fx);
  EXPECT_EQ(ls.mode(), FitMode::LeastSquares);
  const Matrix oracle = kxy.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(fx);
  EXPECT_LE((ls.theta() - oracle).norm() / oracle.norm(), 1e-6);

  const Regressor ridge = fit(k, x, y, fx, 1e-3);
  EXPECT_EQ(ridge.mode(), FitMode::Ridge);
  const Matrix normal = kxy.transpose() * kxy + 1e-3 * Matrix::Identity(6, 6);
  const Matrix oracle_r = normal.inverse() * kxy.transpose() * fx;
  EXPECT_LE((ridge.theta() - oracle_r).norm() / oracle_r.norm(), 1e-8);

  const Regressor same = fit(k, x, x, fx, 1e-2);
  const Matrix oracle_s = (slow_gram(k, x, x) + 1e-2 * Matrix::Identity(30, 30)).inverse() * fx;
  EXPECT_LE((same.theta() - oracle_s).norm() / oracle_s.norm(), 1e-8);
}

TEST_P(BothFamilies, GradientMatchesFiniteDifferences) {
  const PointSet x = uniform(24, 3, 10);
  const ScaledKernel k = fit_scaling(x, x, GetParam());
  Matrix fx(24, 2);
  fx.col(0) = (x.matrix().col(0).array() * 2.0).sin();
  fx.col(1) = x.matrix().col(1).array() * x.matrix().col(2).array();
  const Regressor r = fit(k, x, fx);
  const PointSet z = uniform(6, 3, 11, 0.15, 0.85);
  const Tensor3 g = gradient(r, z);
  const double h = 1e-5;
  for (Index i = 0; i < z.size(); ++i) {
    for (Index d = 0; d < 3; ++d) {
      const Matrix fp = predict(r, PointSet::from(perturbed(z, i, d, h)));
      const Matrix fm = predict(r, PointSet::from(perturbed(z, i, d, -h)));
      for (Index l = 0; l < 2; ++l) {
        const double fd = (fp(i, l) - fm(i, l)) / (2 * h);
        EXPECT_NEAR(g(i, d, l), fd, std::max(1e-4, 1e-3 * std::abs(fd))) << i << "," << d << "," << l;
      }
    }
  }
}

TEST(Gradient, LinearSlopeInOneDimension) {
  RowMatrix m(33, 1);
  for (Index i = 0; i < 33; ++i) m(i, 0) = i / 32.0;
  const PointSet x(m);
  const ScaledKernel k = fit_scaling(x, x, "gaussian");
  const Matrix fx = 3.0 * x.matrix() + Matrix::Constant(33, 1, 1.0);
  const Regressor r = fit(k, x, fx);
  RowMatrix zm(5, 1);
  zm << 0.31, 0.42, 0.505, 0.61, 0.72;
  const Tensor3 g = gradient(r, PointSet(zm));
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(g(i, 0, 0), 3.0, 0.05 * 3.0);
}

TEST(Gradient, GramGradientFiniteDifferences) {
  const PointSet y = uniform(7, 2, 12);
  const PointSet z = uniform(4, 2, 13, 0.1, 0.9);
  const ScaledKernel k = fit_scaling(y, y, "gaussian");
  const Matrix gg = gradient_gram(k, z, y);
  ASSERT_EQ(gg.rows(), 8);
  const double h = 1e-6;
  for (Index i = 0; i < 4; ++i) {
    for (Index d = 0; d < 2; ++d) {
      const Matrix fd = (gram(k, PointSet::from(perturbed(z, i, d, h)), y) -
                         gram(k, PointSet::from(perturbed(z, i, d, -h)), y)) / (2 * h);
      for (Index j = 0; j < 7; ++j) EXPECT_NEAR(gg(i * 2 + d, j), fd(i, j), 1e-6);
    }
  }
}

TEST(Laplacian, SymmetricNegativeSemidefinite) {
  const PointSet x = uniform(40, 2, 14);
  for (const char* fam : {"gaussian", "matern-l1"}) {
    const ScaledKernel k = fit_scaling(x, x, fam);
    const Matrix l = laplacian_operator(k, x);
    EXPECT_LE((l - l.transpose()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, l.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(l);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-8 * std::max(1.0, l.cwiseAbs().maxCoeff())) << fam;
  }
}

TEST(Laplacian, TwoPointDirectProduct) {
  RowMatrix m(2, 2);
  m << 0.1, 0.2, 0.7, 0.4;
  const PointSet x(m);
  const ScaledKernel k = ScaledKernel::unscaled("gaussian", 2);
  const Matrix g = gradient_gram(k, x, x) * slow_gram(k, x, x).inverse();
  const Matrix oracle = -g.transpose() * g;
  EXPECT_LE((laplacian_operator(k, x) - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Laplacian, ConstantResidualIsReported) {
  RowMatrix m(32, 1);
  for (Index i = 0; i < 32; ++i) m(i, 0) = i / 31.0;
  const PointSet x(m);
  const ScaledKernel k = fit_scaling(x, x, "matern-l1");
  const Vector ones = Vector::Ones(32);
  const double residual = (laplacian_operator(k, x) * ones).norm();
  RecordProperty("constant_residual", std::to_string(residual));
  EXPECT_TRUE(std::isfinite(residual));
}

TEST(Mmd, Properties) {
  const PointSet x = uniform(30, 3, 15);
  const PointSet z = uniform(17, 3, 16);
  for (const char* fam : {"gaussian", "matern-l1"}) {
    const ScaledKernel k = fit_scaling(x, x, fam);
    EXPECT_LE(mmd(k, x, x), 1e-12);
    EXPECT_EQ(mmd(k, x, z), mmd(k, z, x));
    EXPECT_GE(mmd(k, x, z), 0.0);
    const PointSet a = x.select(std::vector<Index>{2});
    const PointSet b = z.select(std::vector<Index>{5});
    const double single = k(a.point(0), a.point(0)) + k(b.point(0), b.point(0)) - 2 * k(a.point(0), b.point(0));
    EXPECT_NEAR(mmd(k, a, b), single, 1e-12);
  }
}

TEST(Discrepancy, MatrixFormula) {
  const PointSet x = uniform(6, 2, 17);
  const PointSet z = uniform(5, 2, 18);
  const ScaledKernel k = fit_scaling(x, x, "gaussian");
  const Matrix m = discrepancy_matrix(k, x, z);
  const RowMatrix sx = k.map(x), sz = k.map(z);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 5; ++j) {
      EXPECT_NEAR(m(i, j), 2.0 * (1.0 - std::exp(-(sx.row(i) - sz.row(j)).squaredNorm())), 1e-14);
      EXPECT_GE(m(i, j), 0.0);
    }
  const Matrix self = discrepancy_matrix(k, x, x);
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(self(i, i), 0.0);
}

TEST(NormEstimate, CasesAndDenseOracle) {
  const PointSet x = uniform(8, 2, 19);
  const ScaledKernel k = fit_scaling(x, x, "matern-l1");
  const Matrix zero = Matrix::Zero(8, 1);
  EXPECT_EQ(norm_estimate(fit(k, x, zero), zero), 0.0);

  const PointSet one = x.select(std::vector<Index>{0});
  const Matrix f1 = Matrix::Constant(1, 1, -2.0);
  EXPECT_NEAR(norm_estimate(fit(k, one, f1), f1), 4.0 / k(one.point(0), one.point(0)), 1e-14);

  std::mt19937_64 rng(20);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Matrix fx(8, 1);
    for (Index i = 0; i < 8; ++i) fx(i, 0) = n(rng);
    const double oracle = (fx.transpose() * slow_gram(k, x, x).inverse() * fx)(0, 0);
    const double v = norm_estimate(fit(k, x, fx), fx);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, oracle, 1e-8 * oracle);
  }
}

TEST(ErrorBound, ZeroAtSampleAndMonteCarloLog) {
  const PointSet x = uniform(20, 1, 21);
  const ScaledKernel k = fit_scaling(x, x, "matern-l1");
  const Matrix fx = (x.matrix().array() * 3.0).sin().matrix();
  const Regressor r = fit(k, x, fx);
  EXPECT_NEAR(error_bound(k, x, x, r, fx), 0.0, 1e-6);
  int below = 0;
  for (int t = 0; t < 100; ++t) {
    const PointSet z = uniform(10, 1, 100 + t);
    const double b = error_bound(k, z, x, r, fx);
    EXPECT_GE(b, 0.0);
    const double err = (predict(r, z) - (z.matrix().array() * 3.0).sin().matrix()).norm() / std::sqrt(10.0);
    if (err <= b) ++below;
  }
  RecordProperty("error_below_bound_percent", below);
}

TEST(SymmetricSolver, PlainAndJitteredSolves) {
  const PointSet x = uniform(12, 2, 22);
  const Matrix g = gram(fit_scaling(x, x, "matern-l1"), x, x);
  SymmetricSolver s(g);
  EXPECT_EQ(s.jitter(), 0.0);
  const Matrix b = Matrix::Random(12, 2);
  EXPECT_LE((g * s.solve(b) - b).norm(), 1e-10 * b.norm());

  const Matrix ones = Matrix::Ones(4, 4);
  SymmetricSolver r(ones);
  EXPECT_GT(r.jitter(), 0.0);
  const Matrix rhs = Matrix::Ones(4, 1);
  EXPECT_LE((ones * r.solve(rhs) - rhs).norm(), 1e-6);

  Matrix indefinite = Matrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  EXPECT_THROW(SymmetricSolver{indefinite}, IllConditionedError);
}

INSTANTIATE_TEST_SUITE_P(Families, BothFamilies, ::testing::Values("gaussian", "matern-l1"),
                         [](const auto& info) { return info.param == "gaussian" ? "Gaussian" : "Matern"; });
