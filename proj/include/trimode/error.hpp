#ifndef TRIMODE_ERROR_HPP
#define TRIMODE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace trimode {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (tolerances, grid sizes, time windows, labels).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for the configured resource caps.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: stalled step control, solver breakdown, bad fit.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace trimode

#endif  // TRIMODE_ERROR_HPP
