#pragma once

#include <stdexcept>
#include <string>

namespace dfuse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid value in an otherwise well-shaped input (e.g. non-positive depth).
struct DomainError : Error {
  using Error::Error;
};

// Grid/mask dimension mismatch between operands.
struct ShapeError : Error {
  using Error::Error;
};

// Instance too large for a dense-oracle code path.
struct SizeError : Error {
  using Error::Error;
};

// Scalar outside its documented range (e.g. confidence outside [0,1]).
struct RangeError : Error {
  using Error::Error;
};

// Malformed file content; message carries location info where available.
struct ParseError : Error {
  using Error::Error;
};

// Linear system has no unique solution with the given parameters.
struct SingularSystem : Error {
  using Error::Error;
};

// Fewer than 3 non-collinear points available for triangulation.
struct TooFewPoints : Error {
  using Error::Error;
};

struct EmptyCoverage : Error {
  using Error::Error;
};

struct EmptyMask : Error {
  using Error::Error;
};

}  // namespace dfuse
