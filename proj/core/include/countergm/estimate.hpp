#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace countergm {

/// Result of any estimator: point estimate, standard errors and run diagnostics.
struct Estimate {
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  bool converged = false;
  int iterations = 0;
  double wallclock_seconds = 0.0;
  std::string method_tag;
  std::vector<std::string> warnings;

  // MCMLE only: per-iteration step length and largest |t|-ratio of observed vs simulated stats.
  std::vector<double> step_lengths;
  std::vector<double> max_t_ratios;
};

}  // namespace countergm
