#pragma once

#include <stdexcept>
#include <string>

namespace translab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad arguments: exit code 2 in the cli
struct DomainError : Error {
  using Error::Error;
};

// numerical failures: exit code 3 in the cli
struct NumericalError : Error {
  using Error::Error;
};

struct QuadratureError : NumericalError {
  using NumericalError::NumericalError;
};

struct DivergentIntegral : DomainError {
  using DomainError::DomainError;
};

struct NoRootError : NumericalError {
  using NumericalError::NumericalError;
};

struct ResonanceError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularSystemError : NumericalError {
  double smallest_singular_value = 0.0;
  SingularSystemError(const std::string& what, double sv)
      : NumericalError(what), smallest_singular_value(sv) {}
};

struct GeometryError : DomainError {
  using DomainError::DomainError;
};

struct FitError : NumericalError {
  using NumericalError::NumericalError;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace translab
