#pragma once

#include <stdexcept>
#include <string>

namespace qpl {

/// Malformed arguments: dimension mismatch, empty region, bad config values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A restricted matrix could not be inverted reliably.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A hypothesis of a bound was not met, so no claim is made (exit code 2).
class PreconditionFailure : public std::runtime_error {
 public:
  PreconditionFailure(std::string condition, const std::string& detail)
      : std::runtime_error(condition + ": " + detail), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// A certified bound failed on data satisfying its hypotheses. Always a bug (exit code 3).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qpl
