#pragma once

#include <stdexcept>
#include <string>

namespace prefsamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside the operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Dense Cholesky factorization failed even after jitter escalation.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, double final_jitter)
      : Error(what), final_jitter_(final_jitter) {}
  double final_jitter() const noexcept { return final_jitter_; }

 private:
  double final_jitter_;
};

/// A likelihood or posterior term evaluated to a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace prefsamp
