#pragma once

#include <stdexcept>
#include <string>

namespace stpod {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must have orthonormal columns (or be horizontal) does not.
class OrthonormalityError : public Error {
 public:
  using Error::Error;
};

/// base^T target is numerically singular: the target lies outside the
/// logarithm chart of the base point.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

/// The matrix has repeated nonzero singular values.
class NotGenericError : public Error {
 public:
  using Error::Error;
};

/// No column of the snapshot matrix has a usable projection on a singular
/// vector.
class NoWitnessColumnError : public Error {
 public:
  using Error::Error;
};

class SvdError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear solver exhausted its iteration budget.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double velocity_norm, double residual_norm)
      : Error(what), velocity_norm_(velocity_norm), residual_norm_(residual_norm) {}

  double velocity_norm() const noexcept { return velocity_norm_; }
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double velocity_norm_;
  double residual_norm_;
};

/// Non-positive Jacobian determinant at a Gauss point.
class DegenerateElementError : public Error {
 public:
  DegenerateElementError(const std::string& what, int element) : Error(what), element_(element) {}
  int element() const noexcept { return element_; }

 private:
  int element_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace stpod
