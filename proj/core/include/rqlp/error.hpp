#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rqlp {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible with the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input data is unusable (non-finite entries, non-orthonormal bases, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int sweeps, double max_off_diagonal)
      : Error(what), sweeps_(sweeps), max_off_diagonal_(max_off_diagonal) {}

  int sweeps() const noexcept { return sweeps_; }
  double max_off_diagonal() const noexcept { return max_off_diagonal_; }

 private:
  int sweeps_;
  double max_off_diagonal_;
};

// Matrix Market or binary matrix parsing failure. line() is 0 when the
// failure is not tied to a particular line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Dense storage would exceed the configured memory cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The rotated sketch block is numerically singular.
class SingularSketchError : public Error {
 public:
  using Error::Error;
};

// The requested check does not apply to the given factorization
// (e.g. bound checks on a factorization that carries no sketch seed).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rqlp
