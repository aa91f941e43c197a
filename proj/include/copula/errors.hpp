#pragma once

#include <stdexcept>
#include <string>

namespace copula {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad CSV cell, ragged rows, bad schema line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A continuous column with fewer than two distinct observed values.
class DegenerateColumnError : public Error {
 public:
  using Error::Error;
};

/// An ordinal level that never appears among the observed entries.
class UnobservedLevelError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed factorization during fitting.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace copula
