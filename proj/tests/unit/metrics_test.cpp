#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hwdyn/diagnostics.hpp"
#include "hwdyn/error.hpp"
#include "hwdyn/metrics.hpp"

namespace hwdyn::eval {
namespace {

struct CaptureWarnings {
  std::vector<std::string> seen;
  CaptureWarnings() {
    set_warning_handler([this](const std::string& m) { seen.push_back(m); });
  }
  ~CaptureWarnings() { set_warning_handler(nullptr); }
};

double auc_pairs(const std::vector<int>& t, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[i] == 1 && t[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
  }
  return wins / pairs;
}

TEST(Regression, PerfectAndMeanPredictor) {
  const std::vector<double> t = {1, 2, 3, 4};
  auto m = r2_rmse(t, t);
  EXPECT_EQ(m.r2, 1.0);
  EXPECT_EQ(m.rmse, 0.0);
  const std::vector<double> mean(4, 2.5);
  m = r2_rmse(t, mean);
  EXPECT_NEAR(m.r2, 0.0, 1e-15);
  EXPECT_NEAR(m.rmse, std::sqrt(1.25), 1e-15);
}

TEST(Regression, HandComputed) {
  const std::vector<double> t = {1, 2, 3}, p = {1, 3, 2};
  const auto m = r2_rmse(t, p);
  EXPECT_NEAR(m.r2, 0.0, 1e-12);  // SS_res 2, SS_tot 2
  EXPECT_NEAR(m.rmse, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_EQ(m.n, 3u);
}

TEST(Regression, WorkedExample) {
  const std::vector<double> t = {1, 2, 3}, p = {1, 2, 4};
  const auto m = r2_rmse(t, p);
  EXPECT_EQ(m.r2, 0.5);
  EXPECT_EQ(m.rmse, std::sqrt(1.0 / 3.0));
}

TEST(Regression, ConstantTruthWarnsAndIsNan) {
  CaptureWarnings w;
  const std::vector<double> t(5, 3.0), p = {1, 2, 3, 4, 5};
  EXPECT_TRUE(std::isnan(r2_rmse(t, p).r2));
  EXPECT_EQ(w.seen.size(), 1u);
}

TEST(Regression, BadInputsRejected) {
  EXPECT_THROW(r2_rmse(std::vector<double>{}, std::vector<double>{}), ConfigError);
  EXPECT_THROW(r2_rmse(std::vector<double>{1, 2}, std::vector<double>{1}), ConfigError);
}

TEST(Classification, HandComputedConfusion) {
  const std::vector<int> t = {1, 1, 1, 0, 0, 0, 0, 1};
  const std::vector<int> p = {1, 1, 0, 0, 0, 1, 0, 1};
  const std::vector<double> s = {0.9, 0.8, 0.4, 0.2, 0.1, 0.6, 0.3, 0.7};
  const auto m = classification_metrics(t, p, s);
  EXPECT_EQ(m.confusion, (Confusion{3, 1, 1, 3}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.75);
  EXPECT_DOUBLE_EQ(m.f1, 0.75);
  EXPECT_DOUBLE_EQ(m.auc, 15.0 / 16.0);
}

TEST(Classification, WorkedExample) {
  // TP=2, FP=1, FN=1, TN=6
  const std::vector<int> t = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> p = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> s(10, 0.5);
  const auto m = classification_metrics(t, p, s);
  EXPECT_EQ(m.confusion, (Confusion{6, 1, 1, 2}));
  EXPECT_EQ(m.precision, 2.0 / 3.0);
  EXPECT_EQ(m.recall, 2.0 / 3.0);
  EXPECT_EQ(m.f1, 2.0 / 3.0);
  EXPECT_EQ(m.accuracy, 0.8);
  EXPECT_EQ(m.auc, 0.5);  // constant scores
}

TEST(Classification, AllCorrect) {
  const std::vector<int> t = {0, 1, 1, 0};
  const std::vector<double> s = {0.1, 0.9, 0.8, 0.3};
  const auto m = classification_metrics(t, t, s);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.auc, 1.0);
}

TEST(Classification, BoundsOnRandomInputs) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + trial % 30;
    std::vector<int> t(n), p(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      t[i] = coin(rng);
      p[i] = coin(rng);
      s[i] = u(rng);
    }
    t[0] = 0;
    t[1] = 1;
    const auto m = classification_metrics(t, p, s);
    ASSERT_GE(m.accuracy, 0.0);
    ASSERT_LE(m.accuracy, 1.0);
    ASSERT_GE(m.f1, 0.0);
    ASSERT_LE(m.f1, 1.0);
    ASSERT_EQ(m.confusion.total(), static_cast<std::size_t>(n));
  }
}

TEST(Classification, NoPositivePredictionsGiveZeroF1) {
  const std::vector<int> t = {1, 0, 1, 0}, p = {0, 0, 0, 0};
  const std::vector<double> s = {0.4, 0.1, 0.3, 0.2};
  const auto m = classification_metrics(t, p, s);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(m.auc, 1.0);
}

TEST(Classification, NonBinaryLabelsRejected) {
  const std::vector<int> t = {2, 0}, p = {0, 0};
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_THROW(classification_metrics(t, p, s), ConfigError);
}

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coin(0, 1), level(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 40;
    std::vector<int> t(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      t[i] = coin(rng);
      s[i] = level(rng) / 6.0;  // plenty of ties
    }
    t[0] = 0;
    t[1] = 1;
    ASSERT_NEAR(rank_auc(t, s), auc_pairs(t, s), 1e-12);
  }
}

TEST(Auc, MonotoneTransformInvariantAndComplement) {
  const std::vector<int> t = {0, 1, 1, 0, 1, 0, 0, 1, 1};
  const std::vector<double> s = {0.1, 0.7, 0.4, 0.5, 0.9, 0.2, 0.6, 0.3, 0.8};
  std::vector<double> e, neg;
  for (double v : s) {
    e.push_back(std::exp(5 * v));
    neg.push_back(-v);
  }
  EXPECT_DOUBLE_EQ(rank_auc(t, s), rank_auc(t, e));
  EXPECT_NEAR(rank_auc(t, s) + rank_auc(t, neg), 1.0, 1e-15);
}

TEST(Auc, SingleClassWarnsNan) {
  CaptureWarnings w;
  EXPECT_TRUE(std::isnan(rank_auc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.3})));
  EXPECT_FALSE(w.seen.empty());
}

TEST(Baseline, Majority) {
  EXPECT_DOUBLE_EQ(majority_baseline(std::vector<int>{1, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(majority_baseline(std::vector<int>{0, 1}), 0.5);
  std::vector<int> split_262_485(485, 0);
  std::fill(split_262_485.begin(), split_262_485.begin() + 262, 1);
  EXPECT_EQ(majority_baseline(split_262_485), 262.0 / 485.0);
  EXPECT_NEAR(majority_baseline(split_262_485), 0.5402, 5e-5);
  EXPECT_THROW(majority_baseline(std::vector<int>{}), ConfigError);
}

TEST(Spearman, KnownValues) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{2, 4, 8, 16, 32}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0);
  // Pearson on average ranks: ranks of y are 1, 2.5, 2.5, 4, 5.
  EXPECT_NEAR(spearman(x, std::vector<double>{1, 3, 3, 4, 5}), 0.9746794344808963, 1e-12);
  EXPECT_TRUE(std::isnan(spearman(x, std::vector<double>(5, 1.0))));
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> v = {7, 1, 3, 5};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 7.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 2.5);
  EXPECT_THROW(quantile(v, 1.5), ConfigError);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), ConfigError);
}

TEST(Confusion, Accumulates) {
  Confusion a{1, 2, 3, 4};
  a += Confusion{1, 1, 1, 1};
  EXPECT_EQ(a, (Confusion{2, 3, 4, 5}));
  EXPECT_EQ(a.total(), 14u);
}

}  // namespace
}  // namespace hwdyn::eval
