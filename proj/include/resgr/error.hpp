#pragma once

#include <stdexcept>
#include <string>

namespace resgr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class SingularOperator : public Error {
 public:
  using Error::Error;
};

/// Generating-function radius |kappa| (||mu||_* + |lambda gamma|) < 1 violated.
class RadiusViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, solver failures, bad quadrature.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace resgr
