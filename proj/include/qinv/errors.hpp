#pragma once

#include <stdexcept>
#include <string>

namespace qinv {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
struct PreconditionError : Error {
  using Error::Error;
};

/// Malformed user input (files, shapes, flags).
struct InputError : Error {
  using Error::Error;
};

/// A Choi matrix that should certify complete positivity is not PSD.
struct NotCompletelyPositive : Error {
  double min_eigenvalue;
  NotCompletelyPositive(const std::string& what, double min_eig)
      : Error(what), min_eigenvalue(min_eig) {}
};

/// The projected Choi matrix (or GNS Gram matrix) of a candidate generator
/// is not PSD, so the map cannot generate a CP semigroup.
struct NotConditionallyCompletelyPositive : Error {
  double min_eigenvalue;
  NotConditionallyCompletelyPositive(const std::string& what, double min_eig)
      : Error(what), min_eigenvalue(min_eig) {}
};

/// An identity that holds in exact arithmetic failed beyond tolerance.
struct NumericalFault : Error {
  using Error::Error;
};

}  // namespace qinv
