#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace countergm {

/// Malformed input file. The message names the file and line where possible.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model definition (unknown term, unresolved covariate, bad reference/support pairing).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain an operation accepts.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A precomputed structure would exceed its configured memory budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(std::size_t required, std::size_t budget)
      : std::runtime_error("memory budget exceeded: requires " + std::to_string(required) +
                           " bytes, budget is " + std::to_string(budget) + " bytes"),
        required_bytes(required),
        budget_bytes(budget) {}

  std::size_t required_bytes;
  std::size_t budget_bytes;
};

/// Numerical failure that makes an estimate meaningless (singular curvature, MLE nonexistence).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace countergm
