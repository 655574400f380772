#include "hwdyn/linear.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Cholesky>

#include "hwdyn/error.hpp"

namespace hwdyn::learn {
namespace {

void check_fit_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
  if (X.rows() != y.size()) throw ConfigError(std::string(who) + ": row count mismatch");
  if (X.rows() <= X.cols()) {
    throw ConfigError(std::string(who) + ": needs more rows than columns");
  }
  if (!X.allFinite() || !y.allFinite()) throw DataError(std::string(who) + ": non-finite input");
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

}  // namespace

void DesignMatrix::validate() const {
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) {
    throw ConfigError("design matrix: " + std::to_string(names.size()) + " names for " +
                      std::to_string(X.cols()) + " columns");
  }
  if (y.size() != X.rows()) throw ConfigError("design matrix: target length mismatch");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ConfigError("design matrix: duplicate column '" + n + "'");
  }
  if (!X.allFinite() || !y.allFinite()) throw DataError("design matrix: non-finite entry");
}

Eigen::Index DesignMatrix::column_index(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown column '" + std::string(name) + "'");
  return it - names.begin();
}

DesignMatrix DesignMatrix::with_columns(const std::vector<std::string>& keep) const {
  DesignMatrix out;
  out.names = keep;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) = X.col(column_index(keep[j]));
  }
  out.y = y;
  return out;
}

DesignMatrix DesignMatrix::with_rows(const std::vector<Eigen::Index>& rows) const {
  DesignMatrix out;
  out.names = names;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw ConfigError("standardizer: no rows");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt((X.col(j).array() - s.mean(j)).square().mean());
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw ConfigError("standardizer: column count mismatch");
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd LinearFit::decision(const Eigen::MatrixXd& X) const {
  if (X.cols() != weights.size()) throw ConfigError("linear model: column count mismatch");
  return (X * weights).array() + intercept;
}

double sigmoid(double z) {
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge) {
  check_fit_inputs(X, y, "fit_ols");
  const Eigen::MatrixXd A = with_intercept(X);
  Eigen::MatrixXd gram = A.transpose() * A;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd beta = gram.ldlt().solve(A.transpose() * y);
  if (!beta.allFinite()) throw NumericError("fit_ols: singular normal equations");
  LinearFit fit;
  fit.intercept = beta(0);
  fit.weights = beta.tail(X.cols());
  return fit;
}

LinearFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                       int max_iterations, double tolerance) {
  check_fit_inputs(X, y, "fit_logistic");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("fit_logistic: labels must be 0 or 1");
  }
  const Eigen::MatrixXd A = with_intercept(X);
  const Eigen::Index k = A.cols();
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(k, l2);
  penalty(0) = 0.0;

  const auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = A * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z(i));
      ll += y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p);
    }
    return ll - 0.5 * (penalty.array() * beta.array().square()).sum();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double current = objective(beta);
  LinearFit fit;
  fit.converged = false;
  for (int it = 1; it <= max_iterations; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd z = A * beta;
    Eigen::VectorXd p(z.size()), w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      p(i) = sigmoid(z(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    Eigen::MatrixXd H = A.transpose() * w.asDiagonal() * A;
    H.diagonal() += penalty;
    // Keeps the intercept row solvable when every weight underflows.
    H.diagonal().array() += 1e-12;
    const Eigen::VectorXd grad = A.transpose() * (y - p) - penalty.cwiseProduct(beta);
    Eigen::VectorXd step = H.ldlt().solve(grad);
    if (!step.allFinite()) throw NumericError("fit_logistic: singular Hessian");

    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    double value = objective(next);
    for (int h = 0; h < 30 && value < current; ++h) {
      scale *= 0.5;
      next = beta + scale * step;
      value = objective(next);
    }
    const double change = (scale * step).cwiseAbs().maxCoeff();
    if (value >= current) {
      beta = next;
      current = value;
    }
    if (change < tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = beta(0);
  fit.weights = beta.tail(X.cols());
  return fit;
}

double residual_sum_of_squares(const LinearFit& fit, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y) {
  return (y - fit.decision(X)).squaredNorm();
}

double log_likelihood(const LinearFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::VectorXd z = fit.decision(X);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z(i));
    ll += y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p);
  }
  return ll;
}

}  // namespace hwdyn::learn
