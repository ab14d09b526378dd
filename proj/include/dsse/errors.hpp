#ifndef DSSE_ERRORS_HPP_
#define DSSE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dsse {

// Root of every error raised by the library. The CLI maps these onto exit
// codes: input problems -> 2, solver failures -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input and data errors.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class DuplicateLine : public InputError {
 public:
  using InputError::InputError;
};

class UnknownBusReference : public InputError {
 public:
  using InputError::InputError;
};

class EmptyRegion : public InputError {
 public:
  using InputError::InputError;
};

class UnassignedBus : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, int line, int column,
             const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ":" +
                   std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Numerical failures.
class SolverError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularKkt : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularJacobian : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularBordered : public SolverError {
 public:
  using SolverError::SolverError;
};

class ZeroVoltage : public SolverError {
 public:
  using SolverError::SolverError;
};

class Diverged : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace dsse

#endif  // DSSE_ERRORS_HPP_
