#include "countergm/importance.hpp"

#include <cmath>

#include "countergm/errors.hpp"

namespace countergm {

namespace {

struct Weighted {
  double log_mean_exp;
  Eigen::VectorXd weights;
};

Weighted weigh(const Eigen::MatrixXd& samples, const Eigen::VectorXd& delta) {
  const Eigen::VectorXd eta = samples * delta;
  const double m = eta.maxCoeff();
  Eigen::VectorXd w = (eta.array() - m).exp();
  const double total = w.sum();
  w /= total;
  return {m + std::log(total / static_cast<double>(samples.rows())), std::move(w)};
}

// Maximizes l(delta) - nu/2 ||delta||^2 from `start`.
Eigen::VectorXd ridge_newton(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target, double nu,
                             Eigen::VectorXd delta) {
  const Eigen::Index k = samples.cols();
  auto penalized = [&](const Eigen::VectorXd& d) {
    return log_ratio_objective(samples, target, d).value - 0.5 * nu * d.squaredNorm();
  };
  double current = penalized(delta);
  for (int iter = 0; iter < 200; ++iter) {
    const LogRatioValue v = log_ratio_objective(samples, target, delta);
    const Eigen::VectorXd grad = v.gradient - nu * delta;
    Eigen::MatrixXd neg_h = -v.hessian + nu * Eigen::MatrixXd::Identity(k, k);
    // Tiny relative jitter keeps the solve defined when a statistic never varies.
    const double jitter = 1e-12 * std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff());
    neg_h.diagonal().array() += jitter;
    const Eigen::VectorXd step = neg_h.ldlt().solve(grad);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = delta + t * step;
      const double val = penalized(trial);
      if (std::isfinite(val) && val >= current - 1e-14 * std::abs(current)) {
        delta = trial;
        improved = val > current;
        current = val;
        break;
      }
      t *= 0.5;
    }
    if ((t * step).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + delta.cwiseAbs().maxCoeff()) || !improved) break;
  }
  return delta;
}

}  // namespace

LogRatioValue log_ratio_objective(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& delta) {
  if (samples.rows() == 0) throw DomainError("no simulated statistics");
  const Weighted w = weigh(samples, delta);
  LogRatioValue out;
  out.value = delta.dot(target) - w.log_mean_exp;
  const Eigen::VectorXd mean = samples.transpose() * w.weights;
  out.gradient = target - mean;
  const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  out.hessian = -(centered.transpose() * w.weights.asDiagonal() * centered);
  out.ess = effective_sample_size(w.weights);
  return out;
}

Eigen::VectorXd importance_weights(const Eigen::MatrixXd& samples, const Eigen::VectorXd& delta) {
  return weigh(samples, delta).weights;
}

double effective_sample_size(const Eigen::VectorXd& weights) {
  const double s = weights.sum();
  return s * s / weights.squaredNorm();
}

Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd w = weights / weights.sum();
  const Eigen::VectorXd mean = samples.transpose() * w;
  const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  return centered.transpose() * w.asDiagonal() * centered;
}

Eigen::VectorXd maximize_log_ratio(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target,
                                   double radius) {
  const Eigen::Index k = samples.cols();
  const LogRatioValue at_zero = log_ratio_objective(samples, target, Eigen::VectorXd::Zero(k));
  const double scale = std::max(1e-300, (-at_zero.hessian).diagonal().maxCoeff());
  const double nu_floor = 1e-10 * scale;

  Eigen::VectorXd free_solution = ridge_newton(samples, target, nu_floor, Eigen::VectorXd::Zero(k));
  if (!std::isfinite(radius) || free_solution.norm() <= radius) return free_solution;

  // The constrained optimum has ||delta(nu)|| = radius; the norm decreases in nu.
  double lo = nu_floor;
  double hi = std::max(1.0, at_zero.gradient.norm() / radius) * 2.0;
  while (ridge_newton(samples, target, hi, Eigen::VectorXd::Zero(k)).norm() > radius) hi *= 4.0;
  Eigen::VectorXd best = ridge_newton(samples, target, hi, Eigen::VectorXd::Zero(k));
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    const Eigen::VectorXd d = ridge_newton(samples, target, mid, best);
    if (d.norm() > radius) {
      lo = mid;
    } else {
      hi = mid;
      best = d;
    }
    if (hi / lo < 1.0 + 1e-6) break;
  }
  return best;
}

}  // namespace countergm
