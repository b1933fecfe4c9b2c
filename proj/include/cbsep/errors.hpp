#pragma once

#include <stdexcept>
#include <string>

namespace cbsep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not match the declared factorization.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A dimension cap was exceeded.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be Hermitian is not.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel hit its iteration limit.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A function passed as a linear map is not linear.
class LinearityError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON input; the message names the offending path.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbsep
