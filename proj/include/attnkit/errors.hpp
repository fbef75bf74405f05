#pragma once

#include <stdexcept>
#include <string>

namespace attnkit {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes are incompatible or out of range.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A mechanism was asked to run under a pattern it does not support.
class UnsupportedPatternError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, diverging iterations, unstable parameters.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or unknown identifiers.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or insufficient input data (CSV rows, stats tables, fit points).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace attnkit
