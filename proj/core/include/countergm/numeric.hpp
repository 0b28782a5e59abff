#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace countergm {

/// ln(v!) for v >= 0. Tabulated for small v, log-gamma beyond.
double log_factorial(std::int64_t v);

/// Numerically stable ln(sum exp(x)). Returns -inf for an empty span.
double logsumexp(std::span<const double> x);

/// Cholesky-based inverse of a symmetric positive definite matrix.
/// Returns false (leaving `inverse` untouched) when the matrix is not numerically SPD.
bool invert_spd(const Eigen::MatrixXd& a, Eigen::MatrixXd& inverse, double rel_tol = 1e-12);

/// Sample covariance (divisor rows-1) of the rows of `x`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

/// Maximum absolute entry; 0 for an empty vector.
inline double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace countergm
