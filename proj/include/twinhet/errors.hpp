#pragma once

#include <stdexcept>
#include <string>

namespace twinhet {

/// Base of every error raised by the library. The CLI maps each subclass to
/// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (unknown keys, broken invariants).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside a model's domain, or a numerical procedure that failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-system or format failure while reading/writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace twinhet
