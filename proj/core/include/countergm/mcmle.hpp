#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "countergm/cd.hpp"
#include "countergm/estimate.hpp"
#include "countergm/graph.hpp"
#include "countergm/model.hpp"
#include "countergm/mple.hpp"
#include "countergm/sampler.hpp"

namespace countergm {

enum class StepLengthMode { Damped, Full };

struct MCMLEConfig {
  std::int64_t interval = 1024;
  std::optional<std::int64_t> burnin;  ///< defaults to 16 * interval
  std::int64_t n_samples = 1024;
  int max_iterations = 500;
  ProposalKind proposal = RandomDyad{};
  StepLengthMode step_length_mode = StepLengthMode::Damped;
  double hull_margin = 0.05;      ///< gamma = (1 - margin) * hull extent when the target is outside
  double min_step_length = 1e-3;
  double t_ratio_threshold = 0.1;
  double hotelling_alpha = 0.05;
  double min_ess_fraction = 0.05;  ///< importance weights below this ESS reject the update
  bool retry_on_failure = true;
  std::uint64_t seed = 0;

  std::int64_t effective_burnin() const { return burnin.value_or(16 * interval); }
  void validate() const;
};

/// Hummel step length: 1 when `target` is strictly inside the hull of `samples`, otherwise
/// (1 - margin) times the extent of the ray from the sample mean towards the target,
/// floored at `min_step`.
double hummel_step_length(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target, double margin,
                          double min_step);

/// Geyer-Thompson MCMLE from `theta_seed`. On non-convergence it reruns once with a
/// fresh sampler seed (if enabled) before returning a flagged estimate.
Estimate fit_mcmle(const CountGraph& g_obs, const Model& model, const Eigen::VectorXd& theta_seed,
                   const MCMLEConfig& cfg);

inline Estimate fit_mcmle(const CountGraph& g_obs, const Model& model, const Estimate& seed,
                          const MCMLEConfig& cfg) {
  return fit_mcmle(g_obs, model, seed.theta, cfg);
}

enum class SeedMethod { Cd, Mple, Vector };

struct PipelineConfig {
  SeedMethod seed_method = SeedMethod::Mple;
  std::optional<Eigen::VectorXd> seed_vector;  ///< used by SeedMethod::Vector (zeros if unset)
  CDConfig cd;
  EdgeSampleSpec mple_sample;
  WindowSpec mple_window = GlobalTruncation{};
  MpleOptions mple;
  MCMLEConfig mcmle;
};

/// Seed estimator followed by MCMLE. The method tag is "cd-mcmle", "mple-mcmle" or "mcmle";
/// wall-clock time covers both stages.
Estimate fit_pipeline(const CountGraph& g_obs, const Model& model, const PipelineConfig& cfg);

}  // namespace countergm
