#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atlasbench {

/// Value outside the domain of an operation (non-finite input, bad bin index).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or infeasible configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor or sequence dimensions do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index or frame outside the available range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite loss or other numerical breakdown during training.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long step = -1)
      : std::runtime_error(step < 0 ? what : "step " + std::to_string(step) + ": " + what),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace atlasbench
