#pragma once

#include <stdexcept>
#include <string>

namespace udnn {

// Error taxonomy used across the library. The CLI maps these onto its
// documented exit codes.

// Operand dimensions do not match.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside its admissible range.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation produced non-finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A file or in-memory artifact is inconsistent (bad magic, truncation,
// shape mismatch, fingerprint mismatch).
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative routine exhausted its budget; carries the last iterate value.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

}  // namespace udnn
