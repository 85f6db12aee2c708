#pragma once

#include <stdexcept>
#include <string>

namespace tfheat {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative or series evaluation failed to reach its tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes or grids do not match.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inverse-problem data violate the admissibility conditions.
class InadmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The denominator of the coefficient map fell below its floor.
class DegenerateDenominatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bound or series argument left the representable range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Scenario documents or command-line input failed validation.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tfheat
