#include "countergm/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "countergm/errors.hpp"
#include "countergm/hull.hpp"
#include "countergm/numeric.hpp"

namespace countergm {

std::int64_t support_size(const EnumSpec& spec) {
  if (spec.n < 2 || spec.n > 3) throw DomainError("oracle enumeration needs 2 <= n <= 3");
  if (spec.cap < 1 || spec.cap > 5) throw DomainError("oracle enumeration needs 1 <= cap <= 5");
  const int dyads = spec.n * (spec.n - 1);
  std::int64_t size = 1;
  for (int d = 0; d < dyads; ++d) {
    size *= spec.cap + 1;
    if (size > kEnumerationGuard) throw DomainError("enumeration exceeds the size guard");
  }
  return size;
}

void for_each_graph(const EnumSpec& spec, const std::function<void(std::int64_t, const CountGraph&)>& fn) {
  const std::int64_t size = support_size(spec);
  CountGraph g(spec.n);
  const std::int64_t dyads = g.dyad_count();
  std::vector<EdgeValue> digits(static_cast<std::size_t>(dyads), 0);
  for (std::int64_t idx = 0; idx < size; ++idx) {
    fn(idx, g);
    // Odometer increment.
    for (std::int64_t d = 0; d < dyads; ++d) {
      const Dyad dy = g.dyad(d);
      if (digits[d] < spec.cap) {
        g.set(dy.from, dy.to, ++digits[d]);
        break;
      }
      digits[d] = 0;
      g.set(dy.from, dy.to, 0);
    }
  }
}

std::vector<CountGraph> enumerate_support(const EnumSpec& spec) {
  std::vector<CountGraph> out;
  out.reserve(static_cast<std::size_t>(support_size(spec)));
  for_each_graph(spec, [&](std::int64_t, const CountGraph& g) { out.push_back(g); });
  return out;
}

std::int64_t state_index(const CountGraph& g, const EnumSpec& spec) {
  if (g.n() != spec.n) throw DomainError("graph size differs from the enumeration spec");
  std::int64_t idx = 0;
  for (std::int64_t d = g.dyad_count() - 1; d >= 0; --d) {
    const Dyad dy = g.dyad(d);
    const EdgeValue v = g(dy.from, dy.to);
    if (v > spec.cap) throw DomainError("graph value above the enumeration cap");
    idx = idx * (spec.cap + 1) + v;
  }
  return idx;
}

ExactFamily::ExactFamily(const Model& model, const EnumSpec& spec) {
  if (model.n() != spec.n) throw DomainError("model node count differs from the enumeration spec");
  if (model.support().cap && *model.support().cap != spec.cap)
    throw DomainError("model cap differs from the enumeration cap");
  const std::int64_t size = support_size(spec);
  stats_.resize(size, model.k());
  log_h_.resize(size);
  for_each_graph(spec, [&](std::int64_t idx, const CountGraph& g) {
    stats_.row(idx) = model.suff_stats(g).transpose();
    log_h_[idx] = model.log_reference(g);
  });
}

Eigen::VectorXd ExactFamily::log_weights(const Eigen::VectorXd& theta) const {
  if (theta.size() != stats_.cols()) throw DomainError("theta has the wrong length");
  return stats_ * theta + log_h_;
}

double ExactFamily::log_normalizer(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd lw = log_weights(theta);
  return logsumexp(std::span<const double>(lw.data(), static_cast<std::size_t>(lw.size())));
}

Eigen::VectorXd ExactFamily::probabilities(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd lw = log_weights(theta);
  const double z = logsumexp(std::span<const double>(lw.data(), static_cast<std::size_t>(lw.size())));
  return (lw.array() - z).exp();
}

Eigen::VectorXd ExactFamily::mean(const Eigen::VectorXd& theta) const {
  return stats_.transpose() * probabilities(theta);
}

Eigen::MatrixXd ExactFamily::covariance(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd p = probabilities(theta);
  const Eigen::VectorXd mu = stats_.transpose() * p;
  const Eigen::MatrixXd c = stats_.rowwise() - mu.transpose();
  return c.transpose() * p.asDiagonal() * c;
}

double ExactFamily::log_likelihood(const Eigen::VectorXd& theta, const Eigen::VectorXd& g_obs,
                                   double log_h_obs) const {
  return theta.dot(g_obs) + log_h_obs - log_normalizer(theta);
}

double exact_log_normalizer(const Model& model, const Eigen::VectorXd& theta, const EnumSpec& spec) {
  return ExactFamily(model, spec).log_normalizer(theta);
}

ExactMle exact_mle(const CountGraph& g_obs, const Model& model, const EnumSpec& spec) {
  const ExactFamily fam(model, spec);
  const Eigen::VectorXd g0 = model.suff_stats(g_obs);
  const double log_h0 = model.log_reference(g_obs);
  const int k = model.k();

  // Distinct attainable statistic vectors.
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(fam.size()));
  for (Eigen::Index r = 0; r < fam.stats().rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) row[c] = fam.stats()(r, c);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < k; ++c) points(static_cast<Eigen::Index>(r), c) = rows[r][c];

  Eigen::MatrixXd unused;
  if (points.rows() <= k || !invert_spd(sample_covariance(points), unused, 1e-12))
    throw EstimationError("model statistics are linearly dependent on this support");
  if (!strictly_inside_hull(points, g0))
    throw EstimationError("observed statistics lie on the boundary of the convex hull: the MLE does not exist");

  ExactMle out;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  double ll = fam.log_likelihood(theta, g0, log_h0);
  for (int iter = 1; iter <= 500; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd grad = g0 - fam.mean(theta);
    if (grad.norm() < 1e-10) break;
    Eigen::MatrixXd inv;
    if (!invert_spd(fam.covariance(theta), inv, 1e-14)) throw EstimationError("exact Fisher information singular");
    const Eigen::VectorXd step = inv * grad;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = theta + t * step;
      const double v = fam.log_likelihood(trial, g0, log_h0);
      if (std::isfinite(v) && v >= ll - 1e-13 * std::abs(ll)) {
        theta = trial;
        ll = v;
        break;
      }
      t *= 0.5;
    }
    if (iter == 500) throw EstimationError("exact MLE Newton iteration did not converge");
  }
  out.theta = theta;
  out.fisher_information = fam.covariance(theta);
  return out;
}

std::vector<double> exact_conditional(const CountGraph& g, const Model& model, const Eigen::VectorXd& theta, int i,
                                      int j, const EnumSpec& spec) {
  support_size(spec);
  if (g.n() != spec.n || model.n() != spec.n) throw DomainError("graph size differs from the enumeration spec");
  if (i == j) throw DomainError("self-loops are not edge variables");
  CountGraph work = g;
  std::vector<double> lp(static_cast<std::size_t>(spec.cap) + 1);
  for (EdgeValue l = 0; l <= spec.cap; ++l) {
    work.set(i, j, l);
    lp[static_cast<std::size_t>(l)] = model.log_potential(work, theta);
  }
  const double z = logsumexp(lp);
  for (double& v : lp) v = std::exp(v - z);
  return lp;
}

}  // namespace countergm
