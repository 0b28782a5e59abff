#include "countergm/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace countergm {

namespace {

constexpr std::int64_t kTableSize = 1 << 15;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    for (std::int64_t v = 0; v < kTableSize; ++v) t[v] = std::lgamma(static_cast<double>(v) + 1.0);
    return t;
  }();
  return table;
}

}  // namespace

double log_factorial(std::int64_t v) {
  if (v < kTableSize) return log_factorial_table()[static_cast<std::size_t>(v)];
  return std::lgamma(static_cast<double>(v) + 1.0);
}

double logsumexp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

bool invert_spd(const Eigen::MatrixXd& a, Eigen::MatrixXd& inverse, double rel_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  // Jacobi scaling so the conditioning test does not depend on the units of each row.
  const Eigen::VectorXd diag = a.diagonal();
  if ((diag.array() <= 0.0).any()) return false;
  const Eigen::VectorXd s = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = s.asDiagonal() * a * s.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if (d.cwiseAbs2().minCoeff() < rel_tol) return false;
  const Eigen::MatrixXd scaled_inv = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  inverse = s.asDiagonal() * scaled_inv * s.asDiagonal();
  return inverse.allFinite();
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const double denom = std::max<Eigen::Index>(x.rows() - 1, 1);
  return (centered.transpose() * centered) / denom;
}

}  // namespace countergm
