#pragma once

#include <stdexcept>
#include <string>

namespace witsbench {

/// Thrown when a closed-form Gaussian integral would overflow double
/// precision.  The offending log-scale magnitude is preserved so callers can
/// report it instead of silently saturating to infinity.
class overflow_error : public std::runtime_error {
 public:
  overflow_error(const std::string& what, double log_magnitude)
      : std::runtime_error(what), log_magnitude_(log_magnitude) {}

  /// Natural-log scale of the value that could not be represented.
  double log_magnitude() const noexcept { return log_magnitude_; }

 private:
  double log_magnitude_;
};

/// Thrown when text input (strategy files, config files, grid syntax) fails
/// to parse.  Line and column are 1-based; column 0 means "whole line".
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, int line, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Thrown when adaptive quadrature exhausts its subdivision budget before
/// meeting the requested tolerance.  Carries the partial estimate and the
/// accumulated error bound so callers can decide whether the partial result
/// is still usable.
class quadrature_error : public std::runtime_error {
 public:
  quadrature_error(const std::string& what, double partial_value,
                   double error_estimate)
      : std::runtime_error(what),
        partial_value_(partial_value),
        error_estimate_(error_estimate) {}

  double partial_value() const noexcept { return partial_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double partial_value_;
  double error_estimate_;
};

}  // namespace witsbench
