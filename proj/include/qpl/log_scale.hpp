#pragma once

#include <compare>
#include <string>

namespace qpl {

/// Positive quantity stored as an exponential tower exp^level(value). Level 0 is a plain
/// double. A value is canonical when level == 0 or value > kLogMax, so exp(value) would not
/// fit in a double; canonical forms compare lexicographically.
class LogScale {
 public:
  static constexpr double kLogMax = 709.782712893384;

  LogScale() = default;
  LogScale(double v) : level_(0), value_(v) {}  // NOLINT: implicit from double is the point
  static LogScale tower(int level, double value);
  /// e^{x} for a double exponent.
  static LogScale from_log(double log_value) { return tower(1, log_value); }

  int level() const noexcept { return level_; }
  double value() const noexcept { return value_; }

  /// Natural logarithm; requires a positive quantity.
  LogScale log() const;
  LogScale exp() const;
  /// x^a for a > 0.
  LogScale pow(double a) const;
  /// x * a for a > 0.
  LogScale scale(double a) const;
  /// x + c for a double c (x + c must stay positive).
  LogScale add(double c) const;

  /// log(x) as a double; +inf when it does not fit.
  double log_double() const;
  /// x as a double; +inf above the double range.
  double to_double() const;
  std::string to_string() const;

  friend std::partial_ordering operator<=>(const LogScale& a, const LogScale& b);
  friend bool operator==(const LogScale& a, const LogScale& b) { return (a <=> b) == 0; }

 private:
  void canonicalize();

  int level_ = 0;
  double value_ = 0.0;
};

}  // namespace qpl
