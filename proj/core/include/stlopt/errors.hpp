#pragma once

#include <stdexcept>
#include <string>

namespace stlopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar parameter lies outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Array lengths or matrix shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A function argument lies outside the mathematical domain of the function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked in a state that does not permit it.
class StateError : public Error {
 public:
  using Error::Error;
};

/// The dynamic system could not be factorized at the given frequency.
class ResonanceSingular : public Error {
 public:
  ResonanceSingular(const std::string& what, double frequency_hz)
      : Error(what), frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stlopt
