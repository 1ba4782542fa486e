#pragma once

#include <stdexcept>
#include <string>

namespace hypfin {

/// Violated precondition of a library call (bad dimensions, unnormalized weights, ...).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Input is well-formed but carries no usable signal, e.g. a network without
/// a single overlapping pair or a sample with zero variance.
class DegenerateInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Line and column are 1-based; 0 means "not applicable".
class SchemaError : public std::runtime_error {
public:
  SchemaError(const std::string &what, std::size_t line = 0,
              std::size_t column = 0)
      : std::runtime_error(format(what, line, column)), line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  static std::string format(const std::string &what, std::size_t line,
                            std::size_t column) {
    if (line == 0)
      return what;
    std::string s = "line " + std::to_string(line);
    if (column != 0)
      s += ", column " + std::to_string(column);
    return s + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Floating-point breakdown inside an iterative method.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading or writing an artifact.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace hypfin
