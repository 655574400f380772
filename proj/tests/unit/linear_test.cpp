#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "hwdyn/error.hpp"
#include "hwdyn/linear.hpp"

namespace hwdyn::learn {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = g(rng);
  }
  return X;
}

TEST(Ols, RecoversExactLinearModel) {
  const auto X = gaussian(50, 3, 1);
  const Eigen::Vector3d w(1.5, -2.0, 0.25);
  const Eigen::VectorXd y = (X * w).array() + 4.0;
  const auto fit = fit_ols(X, y);
  EXPECT_NEAR(fit.intercept, 4.0, 1e-8);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(fit.weights(j), w(j), 1e-8);
  EXPECT_LT(residual_sum_of_squares(fit, X, y), 1e-12);
}

TEST(Ols, MatchesQrOracleOnNoisyData) {
  const auto X = gaussian(80, 4, 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) y(i) = X(i, 0) - X(i, 3) + g(rng);
  Eigen::MatrixXd A(80, 5);
  A << Eigen::VectorXd::Ones(80), X;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
  const auto fit = fit_ols(X, y);
  EXPECT_NEAR(fit.intercept, beta(0), 1e-6);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(fit.weights(j), beta(j + 1), 1e-6);
}

TEST(Ols, ResidualsOrthogonalToColumns) {
  const auto X = gaussian(60, 3, 3);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Eigen::VectorXd y(60);
  for (auto& v : y) v = g(rng);
  const auto fit = fit_ols(X, y);
  const Eigen::VectorXd r = y - fit.decision(X);
  EXPECT_NEAR(r.sum(), 0.0, 1e-6);
  EXPECT_LT((X.transpose() * r).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ols, DuplicateColumnStillSolvable) {
  auto X = gaussian(30, 2, 4);
  Eigen::MatrixXd Xd(30, 3);
  Xd << X, X.col(0);
  const Eigen::VectorXd y = 2.0 * X.col(0) + X.col(1);
  const auto fit = fit_ols(Xd, y);
  EXPECT_TRUE(fit.weights.allFinite());
  EXPECT_NEAR(fit.weights(0) + fit.weights(2), 2.0, 1e-4);
}

TEST(Logistic, GradientVanishesAtSolution) {
  const auto X = gaussian(200, 3, 7);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u;
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(0.5 + X(i, 0) - 0.7 * X(i, 1))));
    y(i) = u(rng) < p ? 1.0 : 0.0;
  }
  const auto fit = fit_logistic(X, y);
  ASSERT_TRUE(fit.converged);
  Eigen::VectorXd p = fit.decision(X);
  for (auto& v : p) v = sigmoid(v);
  const Eigen::VectorXd r = y - p;
  EXPECT_NEAR(r.sum(), 0.0, 1e-6);
  const Eigen::VectorXd grad = X.transpose() * r - kLogisticL2 * fit.weights;
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(fit.weights(0), 1.0, 0.4);
  EXPECT_NEAR(fit.weights(1), -0.7, 0.4);
}

TEST(Logistic, LikelihoodBeatsPerturbations) {
  const auto X = gaussian(120, 2, 9);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u;
  Eigen::VectorXd y(120);
  for (int i = 0; i < 120; ++i) y(i) = u(rng) < 1.0 / (1.0 + std::exp(-2 * X(i, 0))) ? 1 : 0;
  const auto fit = fit_logistic(X, y);
  const double best = log_likelihood(fit, X, y);
  for (int k = 0; k < 3; ++k) {
    for (double h : {-0.05, 0.05}) {
      auto other = fit;
      if (k == 0) other.intercept += h;
      else other.weights(k - 1) += h;
      EXPECT_LT(log_likelihood(other, X, y), best);
    }
  }
}

TEST(Logistic, SeparableDataStaysFinite) {
  Eigen::MatrixXd X(20, 1);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    X(i, 0) = i - 9.5;
    y(i) = i >= 10 ? 1 : 0;
  }
  const auto fit = fit_logistic(X, y);
  EXPECT_TRUE(std::isfinite(fit.intercept));
  EXPECT_TRUE(fit.weights.allFinite());
  EXPECT_TRUE(std::isfinite(log_likelihood(fit, X, y)));
}

TEST(Logistic, RejectsNonBinaryTarget) {
  const auto X = gaussian(10, 1, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 0.5);
  EXPECT_THROW(fit_logistic(X, y), DataError);
}

TEST(Sigmoid, ClampedAndSymmetric) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GE(sigmoid(-1000.0), kProbabilityEpsilon);
  EXPECT_LE(sigmoid(1000.0), 1.0 - kProbabilityEpsilon);
  for (double z : {0.3, 1.0, 4.0}) EXPECT_NEAR(sigmoid(z) + sigmoid(-z), 1.0, 1e-15);
}

TEST(Standardizer, ZeroMeanUnitScale) {
  Eigen::MatrixXd X = gaussian(40, 3, 11);
  X.col(1) = X.col(1) * 7.0 + Eigen::VectorXd::Constant(40, 3.0);
  X.col(2).setConstant(5.0);
  const auto s = Standardizer::fit(X);
  const auto Z = s.apply(X);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(Z.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(Z.col(j).array().square().mean()), 1.0, 1e-12);
  }
  EXPECT_EQ(s.scale(2), 1.0);
  EXPECT_TRUE(Z.col(2).isZero());
}

TEST(Standardizer, OlsPredictionsInvariant) {
  const auto X = gaussian(50, 3, 12);
  Eigen::VectorXd y = X.col(0) * 3.0 - X.col(2);
  y.array() += 1.0;
  Eigen::MatrixXd Xs = X;
  Xs.col(0) *= 100.0;
  const auto s = Standardizer::fit(Xs);
  const auto a = fit_ols(X, y).decision(X);
  const auto b = fit_ols(s.apply(Xs), y).decision(s.apply(Xs));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DesignMatrix, ValidateAndSlice) {
  DesignMatrix m{{"a", "b", "c"}, gaussian(5, 3, 1), Eigen::VectorXd::LinSpaced(5, 0, 4)};
  EXPECT_NO_THROW(m.validate());
  const auto c = m.with_columns({"c", "a"});
  EXPECT_EQ(c.names, (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(c.X.col(0), m.X.col(2));
  const auto r = m.with_rows({4, 1});
  EXPECT_EQ(r.y(0), 4.0);
  EXPECT_EQ(r.X.row(1), m.X.row(1));
  EXPECT_THROW(m.column_index("z"), ConfigError);

  auto dup = m;
  dup.names[2] = "a";
  EXPECT_THROW(dup.validate(), ConfigError);
  auto nan = m;
  nan.X(0, 0) = std::nan("");
  EXPECT_THROW(nan.validate(), DataError);
  auto shape = m;
  shape.y.resize(4);
  EXPECT_THROW(shape.validate(), ConfigError);
}

}  // namespace
}  // namespace hwdyn::learn
