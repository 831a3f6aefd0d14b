#pragma once

#include <stdexcept>
#include <string>

namespace bosegas {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad dimension, out-of-domain parameter, mismatched sizes.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// Enumeration would exceed the configured entry limit.
class ResourceError : public Error {
public:
  using Error::Error;
};

/// Non-finite intermediate or a solver that failed to converge.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A root or bracket could not be found in the allowed search range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// The spectral cutoff leaves more than the allowed fraction of atoms out.
class CutoffError : public Error {
public:
  CutoffError(const std::string& what, double achieved)
      : Error(what), achieved_fraction(achieved) {}
  double achieved_fraction;
};

/// A half-maximum crossing lies outside the sampled grid.
class ExtentError : public Error {
public:
  using Error::Error;
};

/// Unphysical occupation (z e^{-beta eps} >= 1).
class DomainError : public Error {
public:
  using Error::Error;
};

}  // namespace bosegas
