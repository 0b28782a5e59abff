#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "countergm/graph.hpp"
#include "countergm/model.hpp"

namespace countergm {

// Brute-force evaluation over every graph of a small capped support. Test use only.

struct EnumSpec {
  int n = 2;          ///< at most 3
  EdgeValue cap = 1;  ///< at most 5
};

inline constexpr std::int64_t kEnumerationGuard = 100'000'000;

/// (cap+1)^(n(n-1)). Throws DomainError when the spec is out of range or exceeds the guard.
std::int64_t support_size(const EnumSpec& spec);

/// Calls fn(index, graph) for every graph, in index order. The index is the base-(cap+1)
/// number whose digits are the dyad values in dyad-index order (first dyad least significant).
void for_each_graph(const EnumSpec& spec, const std::function<void(std::int64_t, const CountGraph&)>& fn);
std::vector<CountGraph> enumerate_support(const EnumSpec& spec);
std::int64_t state_index(const CountGraph& g, const EnumSpec& spec);

/// Statistics and reference weights of every graph, tabulated once.
class ExactFamily {
 public:
  /// The model's node count and cap must match the spec.
  ExactFamily(const Model& model, const EnumSpec& spec);

  std::int64_t size() const { return static_cast<std::int64_t>(log_h_.size()); }
  const Eigen::MatrixXd& stats() const { return stats_; }
  const Eigen::VectorXd& log_reference() const { return log_h_; }

  double log_normalizer(const Eigen::VectorXd& theta) const;
  /// Probability of every graph, in enumeration order.
  Eigen::VectorXd probabilities(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd mean(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd covariance(const Eigen::VectorXd& theta) const;
  /// Full log-likelihood of observed statistics g_obs with reference log h_obs.
  double log_likelihood(const Eigen::VectorXd& theta, const Eigen::VectorXd& g_obs, double log_h_obs) const;

 private:
  Eigen::VectorXd log_weights(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd stats_;
  Eigen::VectorXd log_h_;
};

double exact_log_normalizer(const Model& model, const Eigen::VectorXd& theta, const EnumSpec& spec);

struct ExactMle {
  Eigen::VectorXd theta;
  Eigen::MatrixXd fisher_information;  ///< covariance of g at theta
  int iterations = 0;
};

/// Newton on the enumerated log-likelihood to gradient norm < 1e-10.
/// Throws EstimationError when g(y_obs) is not interior to the hull of attainable statistics
/// (the MLE does not exist) or when the statistics are linearly dependent.
ExactMle exact_mle(const CountGraph& g_obs, const Model& model, const EnumSpec& spec);

/// P(Y_ij = l | rest) for l = 0..cap, from full potentials of the graphs in the fiber.
std::vector<double> exact_conditional(const CountGraph& g, const Model& model, const Eigen::VectorXd& theta, int i,
                                      int j, const EnumSpec& spec);

}  // namespace countergm
