#pragma once

#include <limits>

#include <Eigen/Dense>

namespace countergm {

/// Importance-sampled log-likelihood ratio of theta_r + delta versus theta_r:
///
///   l(delta) = delta' target - ln( mean_s exp(delta' x_s) )
///
/// where x_s are statistics simulated at theta_r. Both `samples` (S x k) and `target`
/// should be centred on a common point to keep exp() in range; l is invariant to it.
struct LogRatioValue {
  double value = 0.0;
  Eigen::VectorXd gradient;   ///< target - weighted mean of x_s
  Eigen::MatrixXd hessian;    ///< -weighted covariance of x_s
  double ess = 0.0;           ///< effective sample size of the importance weights
};

LogRatioValue log_ratio_objective(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& delta);

/// Normalized importance weights exp(delta' x_s) / sum.
Eigen::VectorXd importance_weights(const Eigen::MatrixXd& samples, const Eigen::VectorXd& delta);

/// (sum w)^2 / sum w^2.
double effective_sample_size(const Eigen::VectorXd& weights);

/// Weighted covariance of the rows of `samples`.
Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights);

/// Maximizes l(delta) subject to ||delta|| <= radius. An infinite radius still applies a
/// vanishing ridge so a target on the hull boundary yields a finite answer.
/// Solves the KKT condition grad l = nu * delta by bisection on nu with inner damped Newton.
Eigen::VectorXd maximize_log_ratio(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target,
                                   double radius = std::numeric_limits<double>::infinity());

}  // namespace countergm
