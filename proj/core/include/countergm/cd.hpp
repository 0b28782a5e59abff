#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "countergm/estimate.hpp"
#include "countergm/graph.hpp"
#include "countergm/model.hpp"
#include "countergm/sampler.hpp"

namespace countergm {

struct CDConfig {
  int steps = 8;          ///< MH steps per chain
  int multiplicity = 1;   ///< proposals per step
  int n_chains = 256;
  int max_rounds = 200;
  double tolerance = 1e-4;   ///< stop when the update norm drops below this
  double trust_radius = 0.5;
  ProposalKind proposal = RandomDyad{};
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// Runs n_chains short chains at theta, each restarted from g_obs, and returns the
/// final sufficient statistics (n_chains x k). Chain c of call `round` uses the RNG
/// stream derive_seed(cfg.seed, round, c), so the result ignores the worker count.
Eigen::MatrixXd cd_sample(const CountGraph& g_obs, const Model& model, const Eigen::VectorXd& theta,
                          const CDConfig& cfg, std::uint64_t round = 0);

/// Contrastive divergence: trust-region importance-sampling updates on data-anchored
/// short-chain samples. If max_rounds is hit the estimate is the mean of the last half
/// of the iterates. Standard errors come from the inverse covariance of the chain-end
/// statistics at the estimate.
Estimate fit_cd(const CountGraph& g_obs, const Model& model, const CDConfig& cfg,
                const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace countergm
