#pragma once

#include <stdexcept>
#include <string>

namespace ncjn {

/// Malformed or out-of-contract input (non-finite entries, non-Hermitian
/// arguments, dimension mismatch, parameters out of range).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative routine did not converge within its budget.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A construction would exceed the configured size budget.
class BudgetExceeded : public std::length_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::length_error(what) {}
};

/// Inputs are individually valid but jointly contradictory (for instance a
/// zero norm next to a nonzero martingale tail).
class Inconsistency : public std::logic_error {
 public:
  explicit Inconsistency(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ncjn
