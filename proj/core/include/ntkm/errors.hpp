#pragma once

#include <stdexcept>
#include <string>

namespace ntkm {

// Operand shapes or lengths disagree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// A precondition on a plain value failed (empty dataset, zero width, ...).
class InvalidArgumentError : public std::invalid_argument {
 public:
  explicit InvalidArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// A trainer produced a non-finite value. step_index() is the 1-based
// training step at which the divergence was detected.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step_index)
      : std::runtime_error(what + " at step " + std::to_string(step_index)),
        step_(step_index) {}
  long step_index() const noexcept { return step_; }

 private:
  long step_;
};

// Malformed input file; line() is the 1-based offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace ntkm
