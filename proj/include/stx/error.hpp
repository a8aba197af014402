#pragma once

#include <stdexcept>
#include <string>

namespace stx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an out-of-range argument or an invalid configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Dataset contents are malformed or a referenced event does not exist.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The model oracle failed or answered with something unusable.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace stx
