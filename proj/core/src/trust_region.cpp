#include "hwdyn/trust_region.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace hwdyn::optim {

TrustRegionResult minimize_least_squares(const ResidualFunction& residual_fn,
                                         Eigen::VectorXd initial, Eigen::Index n_residuals,
                                         const TrustRegionOptions& options) {
  Eigen::VectorXd probe;
  Eigen::VectorXd shifted(n_residuals);
  const auto forward_difference = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                      Eigen::MatrixXd& jac) {
    probe = p;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double h = options.difference_step * std::max(std::abs(p[j]), options.scale_floor);
      probe[j] = p[j] + h;
      residual_fn(probe, shifted);
      jac.col(j) = (shifted - r) / h;
      probe[j] = p[j];
    }
  };
  return minimize_least_squares(residual_fn, forward_difference, std::move(initial), n_residuals,
                                options);
}

TrustRegionResult minimize_least_squares(const ResidualFunction& residual_fn,
                                         const JacobianFunction& jacobian_fn,
                                         Eigen::VectorXd initial, Eigen::Index n_residuals,
                                         const TrustRegionOptions& options) {
  const Eigen::Index n_params = initial.size();
  TrustRegionResult result;
  result.params = std::move(initial);

  Eigen::VectorXd r(n_residuals);
  Eigen::VectorXd r_trial(n_residuals);
  Eigen::MatrixXd jac(n_residuals, n_params);

  residual_fn(result.params, r);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) {
    result.cost = cost;
    return result;
  }

  double lambda = options.initial_damping;
  double nu = 2.0;
  bool need_jacobian = true;
  Eigen::MatrixXd normal(n_params, n_params);
  Eigen::VectorXd gradient(n_params);

  auto scale = [&](Eigen::Index j) {
    return std::max(std::abs(result.params[j]), options.scale_floor);
  };

  while (result.iterations < options.max_iterations) {
    ++result.iterations;
    if (need_jacobian) {
      jacobian_fn(result.params, r, jac);
      normal.noalias() = jac.transpose() * jac;
      gradient.noalias() = jac.transpose() * r;
      need_jacobian = false;
      if (gradient.lpNorm<Eigen::Infinity>() == 0.0) {
        result.converged = true;
        break;
      }
    }

    Eigen::MatrixXd damped = normal;
    for (Eigen::Index j = 0; j < n_params; ++j) {
      damped(j, j) += lambda * std::max(normal(j, j), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
    if (!step.allFinite()) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }

    const Eigen::VectorXd trial = result.params + step;
    residual_fn(trial, r_trial);
    const double trial_cost = 0.5 * r_trial.squaredNorm();

    // Predicted reduction of the local quadratic model.
    double predicted = 0.0;
    for (Eigen::Index j = 0; j < n_params; ++j) {
      predicted += step[j] * (lambda * std::max(normal(j, j), 1e-12) * step[j] - gradient[j]);
    }
    predicted *= 0.5;

    if (std::isfinite(trial_cost) && trial_cost < cost) {
      const double rho = predicted > 0.0 ? (cost - trial_cost) / predicted : 1.0;
      bool small_step = true;
      for (Eigen::Index j = 0; j < n_params; ++j) {
        if (std::abs(step[j]) > options.relative_step_tolerance * scale(j)) small_step = false;
      }
      const bool stalled = cost - trial_cost <= options.relative_cost_tolerance * cost;
      result.params = trial;
      r.swap(r_trial);
      cost = trial_cost;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      need_jacobian = true;
      if (small_step || stalled || cost == 0.0) {
        result.converged = true;
        break;
      }
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e16) {
        // No descent direction left at machine precision.
        result.converged = true;
        break;
      }
    }
  }
  result.cost = cost;
  return result;
}

}  // namespace hwdyn::optim
