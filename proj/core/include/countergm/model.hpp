#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "countergm/graph.hpp"

namespace countergm {

enum class TermKind {
  Sum,              ///< sum of all edge values
  Nonzero,          ///< number of nonzero dyads
  NodeOCov,         ///< sum_ij y_ij * c_i
  NodeICov,         ///< sum_ij y_ij * c_j
  EdgeCov,          ///< sum_ij y_ij * c_ij
  MutualMin,        ///< sum over unordered pairs i<j of min(y_ij, y_ji)
  MixedTwoStarMin,  ///< sum_i min(in-sum_i, out-sum_i)
};

struct TermSpec {
  TermKind kind = TermKind::Sum;
  std::string covariate;  ///< only for the three covariate terms

  /// Parses "sum", "nonzero", "nodeocov(x)", "nodeicov(x)", "edgecov(x)", "mutual", "mixed2star".
  static TermSpec parse(std::string_view text);
  std::string label() const;
  bool needs_covariate() const;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

enum class ReferenceMeasure { Poisson, ConstantCapped };

ReferenceMeasure parse_reference(std::string_view text);
std::string to_string(ReferenceMeasure ref);

struct ModelSpec {
  std::vector<TermSpec> terms;
  ReferenceMeasure reference = ReferenceMeasure::Poisson;
  SupportSpec support;
  CovariateSet covariates;
};

/// ln h(y_ij) - ln h(l): y!/l! for the Poisson reference, 0 for a constant one.
double log_reference_ratio(EdgeValue observed, EdgeValue candidate, ReferenceMeasure ref);

/// A validated model bound to a node count. Covariates are resolved and copied into
/// per-term storage, so a Model is self-contained and cheap to share read-only.
class Model {
 public:
  /// Throws ModelError on empty/duplicate term lists, unresolved covariates, dimension
  /// mismatches, or a constant reference without a finite cap.
  Model(ModelSpec spec, int n);

  int n() const { return n_; }
  int k() const { return static_cast<int>(terms_.size()); }
  const ModelSpec& spec() const { return spec_; }
  ReferenceMeasure reference() const { return spec_.reference; }
  const SupportSpec& support() const { return spec_.support; }
  std::vector<std::string> term_labels() const;
  /// Index of the Sum term, or -1.
  int sum_term_index() const;

  Eigen::VectorXd suff_stats(const CountGraph& g) const;

  /// Generalized change score g(l ∪ y^c_ij) - g(y), computed term-locally.
  /// `out` must have k() entries. Throws DomainError if i == j.
  void change_score(const CountGraph& g, int i, int j, EdgeValue l, std::span<double> out) const;
  Eigen::VectorXd change_score(const CountGraph& g, int i, int j, EdgeValue l) const;

  double log_reference_ratio(EdgeValue observed, EdgeValue candidate) const {
    return countergm::log_reference_ratio(observed, candidate, spec_.reference);
  }
  /// ln h(y).
  double log_reference(const CountGraph& g) const;
  /// theta' g(y) + ln h(y).
  double log_potential(const CountGraph& g, const Eigen::VectorXd& theta) const;

  bool in_support(EdgeValue v) const { return spec_.support.contains(v); }

 private:
  struct Term {
    TermKind kind;
    std::vector<double> node;   // node covariate, length n
    std::vector<double> dyad;   // dyad covariate, row-major n x n
  };

  void check_dimensions(const CountGraph& g) const;

  ModelSpec spec_;
  int n_;
  std::vector<Term> terms_;
};

}  // namespace countergm
