#pragma once

// Design matrices, standardization and the two linear predictors.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hwdyn::learn {

/// Rows are students, columns named features, `y` the target (a real grade
/// or a 0/1 label).
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  Eigen::Index n_rows() const { return X.rows(); }
  Eigen::Index n_cols() const { return X.cols(); }

  /// Throws ConfigError for a shape mismatch or duplicate names, DataError
  /// for non-finite entries.
  void validate() const;
  /// Throws ConfigError for an unknown name.
  Eigen::Index column_index(std::string_view name) const;
  DesignMatrix with_columns(const std::vector<std::string>& keep) const;
  DesignMatrix with_rows(const std::vector<Eigen::Index>& rows) const;
};

/// Per-column z-scoring fitted on one matrix and applied to others.
/// Constant columns keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population std

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

/// intercept + X * weights.
struct LinearFit {
  double intercept = 0.0;
  Eigen::VectorXd weights;
  int iterations = 0;
  bool converged = true;

  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
};

inline constexpr double kOlsRidge = 1e-8;
inline constexpr double kLogisticL2 = 1e-6;
inline constexpr int kLogisticMaxIterations = 100;
inline constexpr double kLogisticTolerance = 1e-8;
/// Probabilities are kept in [eps, 1 - eps].
inline constexpr double kProbabilityEpsilon = 1e-12;

/// Least squares with an intercept via the normal equations, with `ridge`
/// added to the Gram diagonal. Requires rows > columns.
LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge = kOlsRidge);

/// L2-penalized logistic regression by iteratively reweighted least
/// squares (the intercept is not penalized). Stops when the largest
/// coefficient change drops below `tolerance` or after `max_iterations`.
LinearFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2 = kLogisticL2,
                       int max_iterations = kLogisticMaxIterations,
                       double tolerance = kLogisticTolerance);

/// Clamped logistic function.
double sigmoid(double z);

/// Residual sum of squares of an OLS fit.
double residual_sum_of_squares(const LinearFit& fit, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y);
/// Bernoulli log-likelihood of a logistic fit, probabilities clamped.
double log_likelihood(const LinearFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace hwdyn::learn
