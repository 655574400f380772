#pragma once

// Regression and binary-classification scores.

#include <cstddef>
#include <span>

namespace hwdyn::eval {

struct RegressionMetrics {
  std::size_t n = 0;
  double r2 = 0.0;  // NaN when the truth has zero variance
  double rmse = 0.0;
};

/// R^2 = 1 - SS_res / SS_tot and RMSE. Throws ConfigError on empty or
/// unequal inputs; warns and reports NaN R^2 for constant truth.
RegressionMetrics r2_rmse(std::span<const double> truth, std::span<const double> predicted);

/// Rows are truth, columns predictions, for labels 0 (negative) and 1.
struct Confusion {
  std::size_t tn = 0, fp = 0, fn = 0, tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  Confusion& operator+=(const Confusion& o);
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassificationMetrics {
  std::size_t n = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;   // 0 when precision + recall = 0
  double auc = 0.0;  // NaN when the truth has a single class
  Confusion confusion;
};

/// Labels are 0/1; scores are class-1 probabilities (any monotone score
/// works for AUC). AUC is the rank statistic with ties counting one half.
ClassificationMetrics classification_metrics(std::span<const int> truth,
                                             std::span<const int> predicted,
                                             std::span<const double> scores);

/// Probability that a random positive outranks a random negative.
double rank_auc(std::span<const int> truth, std::span<const double> scores);

/// Largest class count over the number of labels.
double majority_baseline(std::span<const int> labels);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation sample quantile (R type 7) of unsorted values.
double quantile(std::span<const double> values, double q);

}  // namespace hwdyn::eval
