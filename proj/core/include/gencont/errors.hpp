#pragma once

#include <stdexcept>
#include <string>

namespace gencont {

// Common base so callers can catch everything this library throws in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix that must be skew-symmetric has a symmetric part above tolerance.
struct InvalidSkew : Error {
  using Error::Error;
};

// A boundary normal that must have unit length does not.
struct InvalidNormal : Error {
  using Error::Error;
};

// Field rank or extent mismatch in a field operation.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid argument combination (unknown model, wrong coupling modulus, ...).
struct ArgumentError : Error {
  using Error::Error;
};

// An inverse homogenization step has no finite answer.
struct InfiniteModulus : Error {
  using Error::Error;
};

// A stiffness system is singular (or provably would be). Carries the kernel
// dimension that was detected or predicted.
struct SingularSystem : Error {
  int kernel_dim;
  SingularSystem(const std::string& what, int dim) : Error(what), kernel_dim(dim) {}
};

// A model/test/boundary-condition combination outside the supported matrix.
struct SpecError : Error {
  using Error::Error;
};

// File or stream problem in a reader or writer.
struct IoError : Error {
  using Error::Error;
};

}  // namespace gencont
