#pragma once

#include <stdexcept>
#include <string>

namespace orlicz_elastica {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its admissible range (family parameters, grid sizes, margins).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Iterative numerics that failed to converge (bracketing, line search, linear solves).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Mesh that violates a structural invariant (orientation, boundary tagging).
class MeshError : public Error {
 public:
  using Error::Error;
};

class OrientationError : public MeshError {
 public:
  explicit OrientationError(int element)
      : MeshError("element " + std::to_string(element) + " has non-positive area (clockwise or degenerate)"),
        element_(element) {}
  int element() const noexcept { return element_; }

 private:
  int element_;
};

class UntaggedEdgeError : public MeshError {
 public:
  UntaggedEdgeError(int a, int b)
      : MeshError("boundary edge (" + std::to_string(a) + ", " + std::to_string(b) + ") carries no tag") {}
};

/// Mismatch between a field and the mesh or constraint set it is used with.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// Configuration problems: unknown keys, bad values, unparsable expressions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace orlicz_elastica
