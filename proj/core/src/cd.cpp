#include "countergm/cd.hpp"

#include <chrono>
#include <cmath>

#include "countergm/errors.hpp"
#include "countergm/importance.hpp"
#include "countergm/mple.hpp"
#include "countergm/numeric.hpp"
#include "countergm/parallel.hpp"
#include "countergm/rng.hpp"

namespace countergm {

void CDConfig::validate() const {
  if (steps < 1) throw DomainError("CD steps must be >= 1");
  if (multiplicity < 1) throw DomainError("CD multiplicity must be >= 1");
  if (n_chains < 2) throw DomainError("CD needs at least 2 chains");
  if (max_rounds < 1) throw DomainError("CD max_rounds must be >= 1");
  if (!(tolerance > 0.0)) throw DomainError("CD tolerance must be positive");
  if (!(trust_radius > 0.0)) throw DomainError("CD trust radius must be positive");
  if (workers < 1) throw DomainError("workers must be >= 1");
  countergm::validate(proposal);
}

Eigen::MatrixXd cd_sample(const CountGraph& g_obs, const Model& model, const Eigen::VectorXd& theta,
                          const CDConfig& cfg, std::uint64_t round) {
  cfg.validate();
  const Eigen::VectorXd g0 = model.suff_stats(g_obs);
  Eigen::MatrixXd out(cfg.n_chains, model.k());
  const std::int64_t moves = static_cast<std::int64_t>(cfg.steps) * cfg.multiplicity;
  parallel_for(static_cast<std::size_t>(cfg.n_chains), cfg.workers, [&](std::size_t c) {
    MetropolisChain chain(model, theta, g_obs, cfg.proposal, derive_seed(cfg.seed, round, c));
    if (chain.stats() != g0) throw EstimationError("CD chain not anchored at the observed network");
    chain.run(moves);
    out.row(static_cast<Eigen::Index>(c)) = chain.stats().transpose();
  });
  return out;
}

Estimate fit_cd(const CountGraph& g_obs, const Model& model, const CDConfig& cfg,
                const std::optional<Eigen::VectorXd>& start) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const Eigen::VectorXd g0 = model.suff_stats(g_obs);
  const int k = model.k();

  Estimate est;
  est.method_tag = "cd";
  Eigen::VectorXd theta = start ? *start : mple_start(g_obs, model);
  if (theta.size() != k || !theta.allFinite()) throw DomainError("invalid CD starting point");

  std::vector<Eigen::VectorXd> iterates;
  bool settled = false;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    est.iterations = round + 1;
    const Eigen::MatrixXd x = cd_sample(g_obs, model, theta, cfg, static_cast<std::uint64_t>(round));
    // Centre on the observed statistics: the target becomes the origin.
    const Eigen::MatrixXd centred = x.rowwise() - g0.transpose();
    const Eigen::VectorXd delta = maximize_log_ratio(centred, Eigen::VectorXd::Zero(k), cfg.trust_radius);
    theta += delta;
    iterates.push_back(theta);
    if (delta.norm() < cfg.tolerance) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    const std::size_t half = iterates.size() / 2;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    for (std::size_t i = half; i < iterates.size(); ++i) mean += iterates[i];
    theta = mean / static_cast<double>(iterates.size() - half);
    est.warnings.push_back("CD reached max_rounds; reporting the mean of the last half of the iterates");
  }

  est.theta = theta;
  const Eigen::MatrixXd x = cd_sample(g_obs, model, theta, cfg, static_cast<std::uint64_t>(cfg.max_rounds));
  Eigen::MatrixXd cov_inv;
  if (invert_spd(sample_covariance(x), cov_inv)) {
    est.se = cov_inv.diagonal().cwiseSqrt();
    est.converged = true;
  } else {
    est.se = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    est.converged = false;
    est.warnings.push_back("degenerate covariance of CD chain-end statistics");
  }
  est.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

}  // namespace countergm
