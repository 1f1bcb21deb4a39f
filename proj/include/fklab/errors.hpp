#pragma once

#include <stdexcept>
#include <string>

namespace fklab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, violated preconditions, unparseable records.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A ray from the requested center meets the boundary more than once.
class NotStarShaped : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Solver did not converge, degenerate mesh, or a fit exceeded its residual budget.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fklab
