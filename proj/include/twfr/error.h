#pragma once

#include <stdexcept>
#include <string>

namespace twfr {

// Base of every error thrown by the library. Subclasses mark the error
// category so the CLI can map failures to messages without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameter values, shapes or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system / decoding problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed names or text formats.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (singular covariance and the like).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace twfr
