#pragma once

#include <stdexcept>
#include <string>

namespace qsense {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: malformed element specs, empty partitions, t <= 0, ...
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A populated component would exceed the photon-number truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// A mode referenced by an operation is not part of the space.
class MissingModeError : public Error {
 public:
  using Error::Error;
};

// A numerical invariant was violated (imaginary expectation residue,
// stationary working point, sampling grid too coarse, fit failure, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class StationaryPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qsense
