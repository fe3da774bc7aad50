#pragma once

#include <stdexcept>
#include <string>

namespace footstep {

/// Raised when model or configuration parameters fall outside their domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a matrix that must be inverted is numerically singular.
class NumericalDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed optimization problems (bad dimensions, indefinite Hessian).
class ProblemConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative geometric solver fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a geometric computation produces a degenerate result.
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when no foothold survives filtering.
class NoFootholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace footstep
