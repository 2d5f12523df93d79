#pragma once

#include <stdexcept>
#include <string>

namespace skewtail {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The argument is admissible but the closed form is not exact there
/// (e.g. the standardized tail below 1/sqrt(2)).
class ValidityError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// An internal numerical contract was broken (eigen-pairing, round-off
/// beyond tolerance). Signals a bug, not bad input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The top singular pair is not simple, so the top plane is not unique.
class MultiplicityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point of the critical-radius objective lying on the excluded set SO(2).
class ExcludedPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data. Row/column are 1-based, 0 if n/a.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, int row = 0, int column = 0)
      : std::runtime_error(what), row_(row), column_(column) {}

  int row() const noexcept { return row_; }
  int column() const noexcept { return column_; }

 private:
  int row_;
  int column_;
};

}  // namespace skewtail
