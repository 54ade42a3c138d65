#pragma once

#include <stdexcept>
#include <string>

namespace cdma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for the given noise model (e.g. the density of the noiseless channel).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// A quadrature could not meet its tolerance; carries the best estimate reached.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double partial) : Error(what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

/// A fixed-point iteration failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds an enumeration or memory cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdma
