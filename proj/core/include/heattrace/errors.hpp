#pragma once

#include <stdexcept>
#include <string>

namespace heattrace {

/// Argument outside the documented domain of an operation (bad geometry,
/// s >= t, epsilon out of range, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input document (measure file, config file) violates its schema.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A requested tolerance is below what double precision can certify.
class ToleranceUnachievable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measure violates an admissibility condition (negative mass, divergent
/// weighted mass, infinite lateral mass on a bounded time window).
class AdmissibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical scheme produced non-finite or out-of-bounds values.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heattrace
