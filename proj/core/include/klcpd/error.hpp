#pragma once

#include <stdexcept>
#include <string>

namespace klcpd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its documented domain (sigma2 <= 0, m < 2, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix or window dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An object was used in the wrong lifecycle state (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value was produced or consumed where finiteness is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A mode or run configuration lacks what it needs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data (CSV, labels, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

/// AUC has no positives or no negatives on the scored range.
class UndefinedAucError : public Error {
 public:
  using Error::Error;
};

}  // namespace klcpd
