#include "countergm/graph.hpp"

#include <algorithm>
#include <cmath>

#include "countergm/errors.hpp"

namespace countergm {

CountGraph::CountGraph(int n)
    : n_(n),
      values_(n >= 2 ? static_cast<std::size_t>(n) * static_cast<std::size_t>(n) : 0, 0),
      out_sum_(n >= 2 ? n : 0, 0),
      in_sum_(n >= 2 ? n : 0, 0) {
  if (n < 2) throw DomainError("a count graph needs at least 2 nodes, got " + std::to_string(n));
}

CountGraph CountGraph::from_matrix(const std::vector<std::vector<EdgeValue>>& rows) {
  const int n = static_cast<int>(rows.size());
  CountGraph g(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw DomainError("matrix is not square");
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        if (rows[i][j] != 0) throw DomainError("diagonal entries must be zero");
        continue;
      }
      g.set(i, j, rows[i][j]);
    }
  }
  return g;
}

EdgeValue CountGraph::at(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw DomainError("node index out of range");
  return values_[index(i, j)];
}

void CountGraph::set(int i, int j, EdgeValue v) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw DomainError("node index out of range");
  if (i == j) throw DomainError("self-loops are not allowed");
  if (v < 0) throw DomainError("edge values must be non-negative");
  EdgeValue& slot = values_[index(i, j)];
  const std::int64_t d = v - slot;
  out_sum_[i] += d;
  in_sum_[j] += d;
  total_ += d;
  nonzero_ += static_cast<std::int64_t>(v > 0) - static_cast<std::int64_t>(slot > 0);
  slot = v;
}

EdgeValue CountGraph::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Dyad CountGraph::dyad(std::int64_t index) const {
  const int i = static_cast<int>(index / (n_ - 1));
  const int r = static_cast<int>(index % (n_ - 1));
  return {i, r < i ? r : r + 1};
}

std::int64_t CountGraph::dyad_index(int i, int j) const {
  return static_cast<std::int64_t>(i) * (n_ - 1) + (j < i ? j : j - 1);
}

void CovariateSet::validate(int n) const {
  for (const auto& [name, v] : node) {
    if (static_cast<int>(v.size()) != n)
      throw ModelError("node covariate '" + name + "' has " + std::to_string(v.size()) +
                       " values, expected " + std::to_string(n));
    for (double x : v)
      if (!std::isfinite(x)) throw ModelError("node covariate '" + name + "' has a non-finite value");
  }
  for (const auto& [name, m] : dyad) {
    if (m.rows() != n || m.cols() != n)
      throw ModelError("dyad covariate '" + name + "' is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
                       std::to_string(n));
    if (!m.allFinite()) throw ModelError("dyad covariate '" + name + "' has a non-finite value");
  }
}

void SupportSpec::validate() const {
  if (cap && *cap < 1) throw ModelError("support cap must be at least 1");
}

GraphSummary summarize(const CountGraph& g) {
  GraphSummary s;
  const double count = static_cast<double>(g.dyad_count());
  s.mean = static_cast<double>(g.total()) / count;
  s.density = static_cast<double>(g.nonzero_count()) / count;
  double ss = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      if (i == j) continue;
      const double d = static_cast<double>(g(i, j)) - s.mean;
      ss += d * d;
      s.max_value = std::max(s.max_value, g(i, j));
    }
  s.sd = std::sqrt(ss / (count - 1.0));
  return s;
}

}  // namespace countergm
