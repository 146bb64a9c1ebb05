#pragma once

#include <stdexcept>
#include <string>

namespace strokegen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad argument, empty input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input geometry is too degenerate to process (e.g. < 2 distinct points).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A transform would move content outside the canvas boundary.
class ContainmentError : public Error {
 public:
  using Error::Error;
};

/// Unknown move or token id.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf showed up in a tensor, a gradient or a loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (JSON schema, checkpoint version, base64).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace strokegen
