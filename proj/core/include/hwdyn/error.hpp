#pragma once

#include <stdexcept>
#include <string>

namespace hwdyn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: bad file syntax or a violated type invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a result for its input.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwdyn
