#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "countergm/estimate.hpp"
#include "countergm/graph.hpp"
#include "countergm/model.hpp"

namespace countergm {

// ---------------------------------------------------------------------------
// Support windows: which candidate values l enter each conditional normalizer.
// ---------------------------------------------------------------------------

/// {0, ..., ceil(lambda_global * max_ij y_ij)} for every dyad.
struct GlobalTruncation {
  double lambda_global = 4.0;
};

/// keep_low ∪ {max(0, floor(y - 4 λ sqrt(y))), ..., ceil(y + 4 λ sqrt(y))}.
struct EdgewiseTruncation {
  double lambda_edge = 1.0;
  std::vector<EdgeValue> keep_low{0, 1};
};

/// Edgewise range represented by `knots` values, each weighted by the number of
/// skipped values it stands for (left step-function approximation). Experimental.
struct Coarsened {
  int knots = 16;
  double lambda_edge = 1.0;
  std::vector<EdgeValue> keep_low{0, 1};
};

using WindowSpec = std::variant<GlobalTruncation, EdgewiseTruncation, Coarsened>;

void validate(const WindowSpec& w);

struct Window {
  std::vector<EdgeValue> values;  ///< sorted, duplicate-free, within support
  std::vector<double> weights;    ///< 1 except for coarsened knots
};

/// Candidate values for a dyad observed at `observed`. The observed value is always
/// present with weight 1. Values above the support cap are dropped.
Window build_window(EdgeValue observed, const SupportSpec& support, const WindowSpec& w, EdgeValue y_max);

// ---------------------------------------------------------------------------
// Edge-variable sampling.
// ---------------------------------------------------------------------------

enum class EdgeSampling { Uniform, TieNoTie, FlatValue };

struct EdgeSampleSpec {
  EdgeSampling strategy = EdgeSampling::Uniform;
  std::int64_t m_edges = 0;  ///< 0 means every dyad
  std::uint64_t seed = 0;
};

/// Sampled dyads in ascending (from, to) order with Horvitz-Thompson weights
/// (stratum size / number drawn from the stratum).
struct DyadSample {
  std::vector<Dyad> dyads;
  std::vector<double> weights;
};

DyadSample sample_edges(const CountGraph& g, const EdgeSampleSpec& spec);
DyadSample all_dyads(const CountGraph& g);

// ---------------------------------------------------------------------------
// Pre-computed pseudo-likelihood terms.
// ---------------------------------------------------------------------------

/// Per-dyad windows with θ-independent pieces cached in flat arrays:
/// for entry e of dyad d (offsets[d] <= e < offsets[d+1]),
///   log_base[e] = ln(window weight) + ln h(y_ij) - ln h(l),
///   delta[e*k .. e*k+k) = Δ_ij(y, l).
class PseudolikCache {
 public:
  int k() const { return k_; }
  std::size_t dyad_count() const { return dyads_.size(); }
  std::size_t entry_count() const { return values_.size(); }
  std::size_t bytes() const;

  const std::vector<Dyad>& dyads() const { return dyads_; }
  EdgeValue observed(std::size_t d) const { return observed_[d]; }
  std::span<const EdgeValue> window_values(std::size_t d) const;
  std::span<const double> log_base(std::size_t d) const;
  std::span<const double> delta(std::size_t d) const;  ///< row-major window x k

  /// Rough bytes needed to cache `entries` window entries for a k-term model.
  static std::size_t estimate_bytes(std::size_t dyads, std::size_t entries, int k);

 private:
  friend PseudolikCache build_cache(const CountGraph&, const Model&, std::span<const Dyad>,
                                    const WindowSpec&, std::size_t, int);
  int k_ = 0;
  std::vector<Dyad> dyads_;
  std::vector<EdgeValue> observed_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeValue> values_;
  std::vector<double> log_base_;
  std::vector<double> delta_;
};

inline constexpr std::size_t kDefaultCacheBudget = std::size_t{2} << 30;  // 2 GiB

/// Throws BudgetError when the estimated cache size exceeds `memory_budget_bytes`.
PseudolikCache build_cache(const CountGraph& g, const Model& model, std::span<const Dyad> dyads,
                           const WindowSpec& w, std::size_t memory_budget_bytes = kDefaultCacheBudget,
                           int workers = 1);

struct PseudolikValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  /// sum_d w_d^2 * (conditional covariance of Δ at dyad d); feeds the standard errors.
  Eigen::MatrixXd weighted_info_sq;
};

/// Dyads per reduction batch. Fixed so results do not depend on the worker count.
inline constexpr std::size_t kPseudolikBatch = 64;

/// Weighted log pseudo-likelihood with exact gradient and Hessian in one pass.
/// `weights` may be empty (all ones). Throws DomainError on a non-finite theta.
PseudolikValue log_pseudolik(const PseudolikCache& cache, const Eigen::VectorXd& theta,
                             std::span<const double> weights = {}, int workers = 1);

/// Normalized log conditional probabilities over the window of cached dyad `d`.
std::vector<double> conditional_logprob(const PseudolikCache& cache, std::size_t d,
                                        const Eigen::VectorXd& theta);

// ---------------------------------------------------------------------------
// Estimation.
// ---------------------------------------------------------------------------

struct MpleOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double step_tolerance = 1e-8;
  int workers = 1;
  std::size_t memory_budget_bytes = kDefaultCacheBudget;
};

/// Damped Newton maximization of the (weighted) log pseudo-likelihood. Standard errors come
/// from the inverse negative Hessian, adjusted for sampling weights:
/// V = H^-1 (sum w^2 H_d) H^-1, which equals -H^-1 when every weight is 1.
/// Throws EstimationError when the Hessian is singular.
Estimate fit_mple(const CountGraph& g, const Model& model, const EdgeSampleSpec& sample,
                  const WindowSpec& window, const MpleOptions& options = {});

/// Same, on an explicit dyad sample.
Estimate fit_mple(const CountGraph& g, const Model& model, const DyadSample& sample,
                  const WindowSpec& window, const MpleOptions& options = {});

/// Starting point: zeros, except the Sum coefficient at ln(mean positive edge value + 1).
Eigen::VectorXd mple_start(const CountGraph& g, const Model& model);

}  // namespace countergm
