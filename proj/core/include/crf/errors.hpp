#pragma once

#include <stdexcept>
#include <string>

namespace crf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad grid parameters, unsupported family, malformed config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear or nonlinear solve failed (zero pivot, residual too large,
/// Newton divergence, near-singular operator).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The metric degenerated (b -> 0 in the interior, a -> 0 or infinity,
/// non-finite values, gauge map lost monotonicity).
class DegenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace crf
