#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

/// Base of all library errors. `kind()` is a stable machine-readable class
/// name, used by the command-line tool when reporting failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// Iterative method (bisection, Newton, eigensolver) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "convergence_error"; }
};

/// Time integration failed: step-size underflow, norm or probability drift.
class IntegrationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "integration_error"; }
};

/// A fit could not be performed (too few points, no usable window, rank
/// deficiency, non-monotone data).
class FitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "fit_error"; }
};

}  // namespace pspin
