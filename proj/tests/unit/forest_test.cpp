#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hwdyn/error.hpp"
#include "hwdyn/forest.hpp"
#include "hwdyn/parallel.hpp"

namespace hwdyn::learn {
namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data step_data(int n, bool classify, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Data d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) d.X(i, j) = u(rng);
    const bool high = d.X(i, 1) > 0.2;
    d.y(i) = classify ? (high ? 1.0 : 0.0) : (high ? 5.0 : -1.0);
  }
  return d;
}

ForestConfig small(int trees, std::uint64_t seed = 1) {
  ForestConfig c;
  c.n_trees = trees;
  c.seed = seed;
  return c;
}

TEST(Forest, LearnsStepRegression) {
  const auto d = step_data(300, false, 1);
  auto cfg = small(60);
  cfg.features_per_split = 3;
  const auto f = fit_forest(d.X, d.y, cfg, ForestMode::regression);
  const auto test = step_data(200, false, 2);
  const Eigen::VectorXd p = f.predict(test.X);
  EXPECT_LT(std::sqrt((p - test.y).array().square().mean()), 0.5);
}

TEST(Forest, LearnsStepClassification) {
  const auto d = step_data(300, true, 3);
  const auto f = fit_forest(d.X, d.y, small(100), ForestMode::classification);
  const auto test = step_data(200, true, 4);
  const Eigen::VectorXd p = f.predict(test.X);
  int correct = 0;
  for (int i = 0; i < 200; ++i) correct += ((p(i) > 0.5) == (test.y(i) == 1.0));
  EXPECT_GE(correct, 190);
}

TEST(Forest, OutputsStayInRange) {
  const auto d = step_data(120, false, 5);
  const auto r = fit_forest(d.X, d.y, small(30), ForestMode::regression);
  const auto c = fit_forest(d.X, (d.y.array() > 0).cast<double>().matrix(), small(30), ForestMode::classification);
  const auto probe = step_data(500, false, 6).X * 3.0;
  const Eigen::VectorXd pr = r.predict(probe), pc = c.predict(probe);
  EXPECT_GE(pr.minCoeff(), d.y.minCoeff());
  EXPECT_LE(pr.maxCoeff(), d.y.maxCoeff());
  EXPECT_GE(pc.minCoeff(), 0.0);
  EXPECT_LE(pc.maxCoeff(), 1.0);
}

TEST(Forest, LeafVotesAreZeroHalfOrOne) {
  const auto d = step_data(80, true, 7);
  const auto f = fit_forest(d.X, d.y, small(20), ForestMode::classification);
  for (const auto& t : f.trees) {
    for (const auto& n : t.nodes) {
      if (n.feature < 0) EXPECT_TRUE(n.value == 0.0 || n.value == 0.5 || n.value == 1.0);
    }
  }
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  const auto d = step_data(150, false, 8);
  set_max_threads(1);
  const auto a = fit_forest(d.X, d.y, small(40, 9), ForestMode::regression);
  set_max_threads(4);
  const auto b = fit_forest(d.X, d.y, small(40, 9), ForestMode::regression);
  set_max_threads(0);
  EXPECT_EQ(a, b);
  const auto c = fit_forest(d.X, d.y, small(40, 10), ForestMode::regression);
  EXPECT_NE(a, c);
}

TEST(Forest, MaxDepthRespected) {
  const auto d = step_data(200, false, 11);
  auto cfg = small(10);
  cfg.max_depth = 2;
  const auto f = fit_forest(d.X, d.y, cfg, ForestMode::regression);
  for (const auto& t : f.trees) EXPECT_LE(t.depth(), 2);
}

TEST(Forest, EveryLeafReachedByTrainingRows) {
  const auto d = step_data(100, false, 12);
  auto cfg = small(15);
  cfg.min_leaf = 3;
  const auto f = fit_forest(d.X, d.y, cfg, ForestMode::regression);
  for (const auto& t : f.trees) {
    std::vector<int> hits(t.nodes.size(), 0);
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
      int n = 0;
      while (t.nodes[n].feature >= 0) {
        n = d.X(i, t.nodes[n].feature) <= t.nodes[n].threshold ? t.nodes[n].left : t.nodes[n].right;
      }
      ++hits[n];
    }
    for (std::size_t n = 0; n < t.nodes.size(); ++n) {
      if (t.nodes[n].feature < 0) EXPECT_GT(hits[n], 0);
    }
  }
}

TEST(Forest, ConstantTargetGivesSingleLeaves) {
  const auto d = step_data(50, false, 13);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(50, 2.5);
  const auto f = fit_forest(d.X, y, small(5), ForestMode::regression);
  for (const auto& t : f.trees) {
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.nodes[0].value, 2.5);
  }
}

TEST(ForestConfig, CandidateCounts) {
  ForestConfig c;
  EXPECT_EQ(c.candidates(ForestMode::classification, 16), 4);
  EXPECT_EQ(c.candidates(ForestMode::regression, 16), 5);
  EXPECT_EQ(c.candidates(ForestMode::regression, 2), 1);
  EXPECT_EQ(c.candidates(ForestMode::classification, 1), 1);
  c.features_per_split = 99;
  EXPECT_EQ(c.candidates(ForestMode::regression, 7), 7);
}

TEST(ForestConfig, InvalidInputsRejected) {
  ForestConfig c;
  c.n_trees = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  const auto d = step_data(20, false, 1);
  EXPECT_THROW(fit_forest(d.X, d.y, small(2), ForestMode::classification), DataError);
  EXPECT_THROW(fit_forest(d.X.topRows(3), d.y.head(3), small(2), ForestMode::regression), ConfigError);
}

}  // namespace
}  // namespace hwdyn::learn
