#pragma once

#include <stdexcept>
#include <string>

namespace minid {

// All library errors derive from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Value outside the range of an invertible function.
struct RangeError : Error {
  using Error::Error;
};

// Family or composition not covered by an operation.
struct UnsupportedError : Error {
  using Error::Error;
};

// A structural invariant (monotonicity, ordering) was violated by the input.
struct InvariantError : Error {
  using Error::Error;
};

}  // namespace minid
