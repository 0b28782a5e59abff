#include "countergm/mcmle.hpp"

#include <chrono>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "countergm/errors.hpp"
#include "countergm/hull.hpp"
#include "countergm/importance.hpp"
#include "countergm/numeric.hpp"
#include "countergm/rng.hpp"

namespace countergm {

void MCMLEConfig::validate() const {
  if (interval < 1 || n_samples < 2 || max_iterations < 1) throw DomainError("MCMLE counts must be positive");
  if (effective_burnin() < 0) throw DomainError("MCMLE burn-in must be non-negative");
  if (!(hull_margin >= 0.0 && hull_margin < 1.0)) throw DomainError("hull margin must be in [0, 1)");
  if (!(min_step_length > 0.0 && min_step_length <= 1.0)) throw DomainError("min step length must be in (0, 1]");
  if (!(t_ratio_threshold > 0.0)) throw DomainError("t-ratio threshold must be positive");
  if (!(hotelling_alpha > 0.0 && hotelling_alpha < 1.0)) throw DomainError("Hotelling alpha must be in (0, 1)");
  if (!(min_ess_fraction > 0.0 && min_ess_fraction < 1.0)) throw DomainError("ESS fraction must be in (0, 1)");
  countergm::validate(proposal);
}

double hummel_step_length(const Eigen::MatrixXd& samples, const Eigen::VectorXd& target, double margin,
                          double min_step) {
  const Eigen::VectorXd mean = samples.colwise().mean().transpose();
  const double extent = ray_hull_extent(samples, mean, target - mean);
  if (extent > 1.0) return 1.0;
  return std::clamp((1.0 - margin) * extent, min_step, 1.0);
}

namespace {

// Effective number of independent draws for the mean: the smallest per-statistic ESS.
double chain_ess(const Eigen::MatrixXd& x) {
  double ess = static_cast<double>(x.rows());
  if (x.rows() < 10) return ess;
  for (const TraceDiagnostics& d : mcmc_diagnostics(x))
    if (d.effective_sample_size) ess = std::min(ess, *d.effective_sample_size);
  return std::max(ess, 2.0);
}

Estimate run_attempt(const CountGraph& g_obs, const Model& model, const Eigen::VectorXd& theta_seed,
                     const MCMLEConfig& cfg, std::uint64_t seed) {
  const int k = model.k();
  const Eigen::VectorXd g0 = model.suff_stats(g_obs);
  const double chi2_crit = boost::math::quantile(boost::math::chi_squared(k), 1.0 - cfg.hotelling_alpha);

  Estimate est;
  Eigen::VectorXd theta = theta_seed;
  CountGraph state = g_obs;
  double damping = 1.0;
  Eigen::MatrixXd last_centred;
  Eigen::VectorXd last_weights;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    est.iterations = it + 1;
    SamplerConfig sc;
    sc.proposal = cfg.proposal;
    sc.interval = cfg.interval;
    sc.burnin = cfg.effective_burnin();
    sc.n_samples = cfg.n_samples;
    sc.seed = derive_seed(seed, static_cast<std::uint64_t>(it));
    const SimulationResult sim = simulate(model, theta, state, sc, false);
    state = sim.final_state;
    const Eigen::MatrixXd centred = sim.stat_traces.rowwise() - g0.transpose();
    const Eigen::VectorXd diff = centred.colwise().mean().transpose();  // simulated mean - observed
    const Eigen::MatrixXd cov = sample_covariance(centred);

    double max_t = 0.0;
    for (int j = 0; j < k; ++j) {
      const double sd = std::sqrt(cov(j, j));
      const double t = sd > 0.0 ? std::abs(diff[j]) / sd : (diff[j] == 0.0 ? 0.0 : INFINITY);
      max_t = std::max(max_t, t);
    }

    const double gamma = cfg.step_length_mode == StepLengthMode::Full
                             ? 1.0
                             : hummel_step_length(centred, Eigen::VectorXd::Zero(k), cfg.hull_margin,
                                                  cfg.min_step_length);
    est.step_lengths.push_back(gamma);
    est.max_t_ratios.push_back(max_t);

    Eigen::MatrixXd cov_inv;
    const bool cov_ok = invert_spd(cov, cov_inv);
    if (gamma == 1.0 && cov_ok && max_t < cfg.t_ratio_threshold) {
      const double hotelling = chain_ess(centred) * diff.dot(cov_inv * diff);
      if (hotelling < chi2_crit) {
        est.theta = theta;
        est.se = cov_inv.diagonal().cwiseSqrt();
        est.converged = true;
        return est;
      }
    }

    // Damped target: the observed statistics pulled towards the simulated mean.
    const double g_eff = std::max(cfg.min_step_length, gamma * damping);
    const Eigen::VectorXd target = (1.0 - g_eff) * diff;
    const Eigen::VectorXd delta = maximize_log_ratio(centred, target);
    const Eigen::VectorXd w = importance_weights(centred, delta);
    last_centred = centred;
    if (!delta.allFinite() ||
        effective_sample_size(w) < cfg.min_ess_fraction * static_cast<double>(cfg.n_samples)) {
      damping *= 0.5;
      est.warnings.push_back("iteration " + std::to_string(it + 1) +
                             ": importance weights degenerate, update rejected");
      last_weights = Eigen::VectorXd::Constant(centred.rows(), 1.0 / static_cast<double>(centred.rows()));
      continue;
    }
    damping = 1.0;
    theta += delta;
    last_weights = w;
  }

  est.theta = theta;
  est.converged = false;
  Eigen::MatrixXd cov_inv;
  if (last_centred.rows() > 0 && invert_spd(weighted_covariance(last_centred, last_weights), cov_inv))
    est.se = cov_inv.diagonal().cwiseSqrt();
  else
    est.se = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  return est;
}

}  // namespace

Estimate fit_mcmle(const CountGraph& g_obs, const Model& model, const Eigen::VectorXd& theta_seed,
                   const MCMLEConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  if (theta_seed.size() != model.k() || !theta_seed.allFinite()) throw DomainError("MCMLE seed must be finite");

  Estimate est = run_attempt(g_obs, model, theta_seed, cfg, cfg.seed);
  if (!est.converged && cfg.retry_on_failure) {
    std::vector<std::string> first_warnings = est.warnings;
    const int first_iterations = est.iterations;
    est = run_attempt(g_obs, model, theta_seed, cfg, derive_seed(cfg.seed, 0x5EED, 1));
    est.iterations += first_iterations;
    first_warnings.push_back("no convergence after " + std::to_string(cfg.max_iterations) +
                             " iterations; reran with a fresh seed");
    est.warnings.insert(est.warnings.begin(), first_warnings.begin(), first_warnings.end());
  }
  if (!est.converged) est.warnings.push_back("MCMLE did not converge");
  est.method_tag = "mcmle";
  est.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

Estimate fit_pipeline(const CountGraph& g_obs, const Model& model, const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::VectorXd seed;
  std::string tag = "mcmle";
  std::vector<std::string> warnings;
  switch (cfg.seed_method) {
    case SeedMethod::Cd: {
      const Estimate s = fit_cd(g_obs, model, cfg.cd);
      seed = s.theta;
      warnings = s.warnings;
      tag = "cd-mcmle";
      break;
    }
    case SeedMethod::Mple: {
      const Estimate s = fit_mple(g_obs, model, cfg.mple_sample, cfg.mple_window, cfg.mple);
      seed = s.theta;
      warnings = s.warnings;
      tag = "mple-mcmle";
      break;
    }
    case SeedMethod::Vector:
      seed = cfg.seed_vector.value_or(Eigen::VectorXd::Zero(model.k()));
      break;
  }
  Estimate est = fit_mcmle(g_obs, model, seed, cfg.mcmle);
  est.warnings.insert(est.warnings.begin(), warnings.begin(), warnings.end());
  est.method_tag = tag;
  est.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

}  // namespace countergm
