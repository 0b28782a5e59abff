#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "countergm/graph.hpp"
#include "countergm/model.hpp"
#include "countergm/rng.hpp"

namespace countergm {

/// Every dyad equally likely to be picked.
struct RandomDyad {
  friend bool operator==(const RandomDyad&, const RandomDyad&) = default;
};

/// Tie/no-tie dyad choice: with probability p_nonzero pick uniformly among nonzero dyads,
/// otherwise uniformly among all dyads.
struct TieWeightedDyad {
  double p_nonzero = 0.5;
  friend bool operator==(const TieWeightedDyad&, const TieWeightedDyad&) = default;
};

using ProposalKind = std::variant<RandomDyad, TieWeightedDyad>;

void validate(const ProposalKind& proposal);

/// Success probability of the geometric step size in the value jump kernel (mean step 4).
inline constexpr double kJumpStepProbability = 0.25;

struct SamplerConfig {
  ProposalKind proposal = RandomDyad{};
  std::int64_t burnin = 16 * 1024;
  std::int64_t interval = 1024;
  std::int64_t n_samples = 1024;
  std::uint64_t seed = 0;

  /// Burn-in defaults to 16 intervals.
  static SamplerConfig with_interval(std::int64_t interval, std::int64_t n_samples, std::uint64_t seed,
                                     ProposalKind proposal = RandomDyad{});
  void validate() const;
};

/// A proposed change of one edge value, with the log Hastings correction
/// ln q(reverse) - ln q(forward) for both the dyad choice and the value jump.
struct Move {
  int from = 0;
  int to = 0;
  EdgeValue current = 0;
  EdgeValue proposed = 0;
  double log_proposal_ratio = 0.0;
};

/// ln q(l -> y) - ln q(y -> l) for the reflected symmetric geometric jump kernel.
double jump_log_proposal_ratio(EdgeValue y, EdgeValue l, double p_step = kJumpStepProbability);

/// Metropolis-Hastings chain over count graphs with incrementally maintained statistics.
/// The model must outlive the chain.
class MetropolisChain {
 public:
  MetropolisChain(const Model& model, Eigen::VectorXd theta, CountGraph start, ProposalKind proposal,
                  std::uint64_t seed);

  /// Draws a dyad and a candidate value. Returns nullopt when the candidate exceeds the cap.
  std::optional<Move> propose();

  /// Metropolis-Hastings accept/reject of `move` against the current state.
  bool apply(const Move& move);

  /// One full MH transition. Returns whether the move was accepted
  /// (a rejected out-of-support proposal counts as a rejected step).
  bool step();

  void run(std::int64_t steps);

  const CountGraph& state() const { return state_; }
  const Eigen::VectorXd& stats() const { return stats_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  void set_theta(const Eigen::VectorXd& theta);
  /// Restarts from `start`; statistics are recomputed from scratch.
  void reset(const CountGraph& start);

  std::int64_t steps_taken() const { return steps_; }
  std::int64_t accepted() const { return accepted_; }

 private:
  double dyad_selection_probability(EdgeValue value_at_dyad, std::int64_t nonzero) const;
  void track_nonzero(std::int64_t dyad, bool now_nonzero);
  void rebuild_nonzero_index();

  const Model* model_;
  Eigen::VectorXd theta_;
  CountGraph state_;
  ProposalKind proposal_;
  Rng rng_;
  Eigen::VectorXd stats_;
  std::vector<double> delta_;
  std::vector<std::int64_t> nonzero_dyads_;
  std::vector<std::int64_t> nonzero_pos_;
  std::int64_t steps_ = 0;
  std::int64_t accepted_ = 0;
  std::int64_t since_recompute_ = 0;
};

/// MH move for a fixed state; a free-function form of one chain step.
/// Returns the accepted flag; `state` is updated in place.
bool mh_step(CountGraph& state, const Eigen::VectorXd& theta, const Model& model,
             const ProposalKind& proposal, Rng& rng);

struct SimulationResult {
  std::vector<CountGraph> samples;   ///< empty unless requested
  Eigen::MatrixXd stat_traces;       ///< n_samples x k
  CountGraph final_state{2};
  double acceptance_rate = 0.0;
};

/// Runs burn-in, then keeps every interval-th state.
SimulationResult simulate(const Model& model, const Eigen::VectorXd& theta, const CountGraph& start,
                          const SamplerConfig& cfg, bool keep_graphs = true);

struct TraceDiagnostics {
  std::optional<double> lag1_autocorrelation;  ///< nullopt for a constant trace
  std::optional<double> effective_sample_size;
};

/// Per-column lag-1 autocorrelation and initial-positive-sequence ESS. Requires >= 10 rows.
std::vector<TraceDiagnostics> mcmc_diagnostics(const Eigen::MatrixXd& stat_traces);

}  // namespace countergm
