#pragma once

#include <stdexcept>
#include <string>

namespace daeobs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, non-finite entries, failed
/// definiteness checks on weights.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The requested initial state admits no DAE solution (E·x0 outside the
/// consistency space).
class InconsistentStateError : public Error {
 public:
  using Error::Error;
};

/// The associated LTI is not stabilizable, so no infinite-horizon
/// controller (or observer, for the dual system) is produced.
class NotStabilizableError : public Error {
 public:
  using Error::Error;
};

/// The functional ℓ cannot be estimated: Fᵀℓ is not a consistent initial
/// value for the dual DAE.
class NotEstimableError : public Error {
 public:
  using Error::Error;
};

/// A construction invariant failed. Indicates a tolerance problem rather
/// than bad user input.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace daeobs
