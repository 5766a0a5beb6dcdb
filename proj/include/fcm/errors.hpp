#pragma once

#include <stdexcept>
#include <string>

namespace fcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, broken symmetry, invalid documents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A linear system or matrix was singular or too ill-conditioned to use.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcm
