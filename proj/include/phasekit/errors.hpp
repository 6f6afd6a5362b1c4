#pragma once

#include <stdexcept>
#include <string>

namespace phasekit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad quantum numbers,
/// non-normalized weights, mismatched spaces, non-monotone observables...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The numerical procedure could not produce a trustworthy result
/// (non-convergence, underflow, eigenvalue crossing).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An observed statistic fell outside the range an estimator can invert.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace phasekit
