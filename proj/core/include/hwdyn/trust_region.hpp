#pragma once

#include <functional>

#include <Eigen/Core>

namespace hwdyn::optim {

/// Fills `residuals` (pre-sized) for parameter vector `params`.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

/// Fills `jacobian` (n_residuals x n_params) at `params`, given the
/// residuals already evaluated there. Lets callers exploit structure, e.g.
/// parameters that only touch a subset of residuals.
using JacobianFunction = std::function<void(const Eigen::VectorXd& params,
                                            const Eigen::VectorXd& residuals,
                                            Eigen::MatrixXd& jacobian)>;

struct TrustRegionOptions {
  int max_iterations = 200;
  /// Stop once every accepted step satisfies |dp_i| <= tol * max(|p_i|, scale_floor).
  double relative_step_tolerance = 1e-6;
  double scale_floor = 1e-3;
  /// Forward-difference step, relative to max(|p_i|, scale_floor).
  double difference_step = 1e-7;
  double initial_damping = 1e-3;
  /// Also stop once an accepted step lowers the cost by less than this
  /// fraction. Zero disables the test.
  double relative_cost_tolerance = 0.0;
};

struct TrustRegionResult {
  Eigen::VectorXd params;
  double cost = 0.0;  // 0.5 * ||r||^2
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with a forward-difference Jacobian. The damping
/// parameter plays the role of an inverse trust radius: it shrinks after a
/// step whose actual reduction tracks the model, and grows after a rejected
/// step, so no analytic derivatives are required.
TrustRegionResult minimize_least_squares(const ResidualFunction& residual_fn,
                                         Eigen::VectorXd initial, Eigen::Index n_residuals,
                                         const TrustRegionOptions& options = {});

/// Same, with a caller-supplied Jacobian (analytic or structured differences).
TrustRegionResult minimize_least_squares(const ResidualFunction& residual_fn,
                                         const JacobianFunction& jacobian_fn,
                                         Eigen::VectorXd initial, Eigen::Index n_residuals,
                                         const TrustRegionOptions& options = {});

}  // namespace hwdyn::optim
