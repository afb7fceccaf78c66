#pragma once

#include <stdexcept>
#include <string>

namespace mbrl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incompatible input (schema violation, mismatched spaces,
/// undefined policy entry, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// The requested operation would need to enumerate more states than allowed.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Iterative evaluation hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A counterexample's stored certificate was not reproduced.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbrl
