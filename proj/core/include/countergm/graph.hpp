#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace countergm {

using EdgeValue = std::int64_t;

/// Ordered pair of distinct nodes, 0-based.
struct Dyad {
  int from = 0;
  int to = 0;

  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

/// Directed network with non-negative integer edge values and no self-loops.
///
/// Storage is a dense row-major n x n matrix. Row and column sums are maintained
/// on every write so that degree-based change scores stay O(1).
class CountGraph {
 public:
  /// All-zero graph on n >= 2 nodes.
  explicit CountGraph(int n);

  /// From a dense matrix; the diagonal must be zero and all values non-negative.
  static CountGraph from_matrix(const std::vector<std::vector<EdgeValue>>& rows);

  int n() const { return n_; }
  std::int64_t dyad_count() const { return static_cast<std::int64_t>(n_) * (n_ - 1); }

  EdgeValue operator()(int i, int j) const { return values_[index(i, j)]; }
  EdgeValue at(int i, int j) const;

  /// Sets y_ij. Throws DomainError on i == j, out-of-range nodes or negative values.
  void set(int i, int j, EdgeValue v);

  std::int64_t out_sum(int i) const { return out_sum_[i]; }
  std::int64_t in_sum(int j) const { return in_sum_[j]; }
  std::int64_t total() const { return total_; }
  std::int64_t nonzero_count() const { return nonzero_; }
  EdgeValue max_value() const;

  /// Maps a dyad index in [0, n(n-1)) to its ordered pair (row-major, diagonal skipped).
  Dyad dyad(std::int64_t index) const;
  std::int64_t dyad_index(int i, int j) const;

  friend bool operator==(const CountGraph& a, const CountGraph& b) {
    return a.n_ == b.n_ && a.values_ == b.values_;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  int n_;
  std::vector<EdgeValue> values_;
  std::vector<std::int64_t> out_sum_;
  std::vector<std::int64_t> in_sum_;
  std::int64_t total_ = 0;
  std::int64_t nonzero_ = 0;
};

/// Exogenous covariates: node-level vectors and dyad-level n x n matrices, by name.
struct CovariateSet {
  std::map<std::string, std::vector<double>> node;
  std::map<std::string, Eigen::MatrixXd> dyad;

  /// Throws ModelError if any value is non-finite or any dimension differs from n.
  void validate(int n) const;
};

/// Edge-value support. Unset cap means the unbounded non-negative integers.
struct SupportSpec {
  std::optional<EdgeValue> cap;

  bool contains(EdgeValue v) const { return v >= 0 && (!cap || v <= *cap); }
  /// Throws ModelError if a cap is set below 1.
  void validate() const;
};

struct GraphSummary {
  EdgeValue max_value = 0;
  double mean = 0.0;
  double sd = 0.0;          ///< sample standard deviation (divisor N-1) over off-diagonal values
  double density = 0.0;     ///< proportion of nonzero dyads
};

GraphSummary summarize(const CountGraph& g);

}  // namespace countergm
