#pragma once

#include <stdexcept>
#include <string>

namespace unmeasure {

/// Raised when an input violates a documented precondition or a problem has
/// no solution (infeasible constraints, failed hypothesis, non-convergence).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

class InfeasibleError : public DomainError {
 public:
  explicit InfeasibleError(const std::string& what) : DomainError(what) {}
};

class ConvergenceError : public DomainError {
 public:
  explicit ConvergenceError(const std::string& what) : DomainError(what) {}
};

}  // namespace unmeasure
