#pragma once

#include <stdexcept>
#include <string>

namespace trasa {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Index outside a table, vocabulary or range.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in the wrong lifecycle state (e.g. a consumed tape).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unusable input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible serialized file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was broken; indicates a bug, not bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace trasa
