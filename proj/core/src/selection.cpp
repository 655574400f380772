#include "hwdyn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "hwdyn/error.hpp"

namespace hwdyn::learn {
namespace {

LinearFit fit_kind(const DesignMatrix& m, LinearKind kind) {
  return kind == LinearKind::ols ? fit_ols(m.X, m.y) : fit_logistic(m.X, m.y);
}

std::vector<std::string> without(const std::vector<std::string>& names, const std::string& drop) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n != drop) out.push_back(n);
  }
  return out;
}

// Lowest score wins; equal scores go to the lexicographically first name.
bool better(double score, const std::string& name, double best, const std::string& best_name) {
  if (score != best) return score < best;
  return name < best_name;
}

}  // namespace

double vif(const DesignMatrix& m, std::string_view column) {
  if (m.n_cols() < 2) throw ConfigError("vif: needs at least two columns");
  const Eigen::Index j = m.column_index(column);
  const Eigen::Index n = m.n_rows();
  Eigen::MatrixXd A(n, m.n_cols());
  A.col(0).setOnes();
  for (Eigen::Index c = 0, k = 1; c < m.n_cols(); ++c) {
    if (c != j) A.col(k++) = m.X.col(c);
  }
  const Eigen::VectorXd target = m.X.col(j);
  const double tss = (target.array() - target.mean()).square().sum();
  if (!(tss > 0.0)) return kVifClamp;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd beta = qr.solve(target);
  const double rss = (target - A * beta).squaredNorm();
  const double r2 = 1.0 - rss / tss;
  if (!(r2 < 1.0 - 1e-6)) return kVifClamp;
  return std::max(1.0, 1.0 / (1.0 - r2));
}

double aic(const LinearFit& fit, const DesignMatrix& m, LinearKind kind) {
  const double n = static_cast<double>(m.n_rows());
  const double k = static_cast<double>(m.n_cols());
  if (kind == LinearKind::ols) {
    const double rss = std::max(residual_sum_of_squares(fit, m.X, m.y), 1e-12);
    return n * std::log(rss / n) + 2.0 * (k + 1.0);
  }
  return -2.0 * log_likelihood(fit, m.X, m.y) + 2.0 * (k + 1.0);
}

double aic(const DesignMatrix& m, LinearKind kind) { return aic(fit_kind(m, kind), m, kind); }

SelectionTrace select_features(const DesignMatrix& m, LinearKind kind) {
  m.validate();
  if (m.n_cols() < 3) throw ConfigError("select_features: needs at least three columns");
  SelectionTrace trace;
  std::vector<std::string> current = m.names;

  while (current.size() > 1) {
    const DesignMatrix sub = m.with_columns(current);
    double worst = -1.0;
    std::string worst_name;
    for (const auto& name : current) {
      const double v = vif(sub, name);
      // Highest VIF wins here, so negate for the shared tie rule.
      if (worst_name.empty() || better(-v, name, -worst, worst_name)) {
        worst = v;
        worst_name = name;
      }
    }
    if (!(worst > kVifThreshold)) break;
    trace.removed_by_vif.emplace_back(worst_name, worst);
    current = without(current, worst_name);
  }

  double current_aic = aic(m.with_columns(current), kind);
  trace.initial_aic = current_aic;
  while (current.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::string best_name;
    for (const auto& name : current) {
      const double a = aic(m.with_columns(without(current, name)), kind);
      if (best_name.empty() || better(a, name, best, best_name)) {
        best = a;
        best_name = name;
      }
    }
    if (!(best < current_aic)) break;
    trace.removed_by_aic.push_back(best_name);
    current = without(current, best_name);
    current_aic = best;
  }
  trace.final_aic = current_aic;
  for (const auto& n : m.names) {
    if (std::find(current.begin(), current.end(), n) != current.end()) trace.surviving.push_back(n);
  }
  return trace;
}

}  // namespace hwdyn::learn
