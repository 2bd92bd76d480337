#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjk {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: bad syntax, unknown names, wrong shapes.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : InputError(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A variable family referenced by an expression was not bound at evaluation.
class UnboundVariableError : public InputError {
 public:
  using InputError::InputError;
};

/// A requested structure (e.g. additive separability) is not present.
class UnsupportedStructureError : public InputError {
 public:
  using InputError::InputError;
};

/// An operation's precondition on the system does not hold (missing H, closedness, ...).
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical failures: the inputs were well formed but the computation could not proceed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// log/sqrt of a negative argument, division by zero, non-integer power of a negative base.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularHessianError : public NumericalError {
 public:
  SingularHessianError(const std::string& message, double time)
      : NumericalError(message), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Newton failed to converge while following a level set.
class TurningPointError : public NumericalError {
 public:
  TurningPointError(const std::string& message, double q) : NumericalError(message), q_(q) {}

  double q() const noexcept { return q_; }

 private:
  double q_;
};

class BranchJumpError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BelowFiberMinimumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A flow left the region where the section is defined.
class DomainExitError : public NumericalError {
 public:
  DomainExitError(const std::string& message, double time) : NumericalError(message), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class RankChangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hjk
