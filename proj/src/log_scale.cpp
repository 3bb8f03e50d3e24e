#include "qpl/log_scale.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "qpl/errors.hpp"

namespace qpl {

LogScale LogScale::tower(int level, double value) {
  if (level < 0) throw InputError("LogScale: negative level");
  LogScale x;
  x.level_ = level;
  x.value_ = value;
  x.canonicalize();
  return x;
}

void LogScale::canonicalize() {
  while (level_ > 0 && value_ <= kLogMax) {
    value_ = std::exp(value_);
    --level_;
  }
}

LogScale LogScale::log() const {
  if (level_ == 0) {
    if (!(value_ > 0.0)) throw InputError("LogScale::log of a non-positive value");
    return LogScale(std::log(value_));
  }
  return tower(level_ - 1, value_);
}

LogScale LogScale::exp() const { return tower(level_ + 1, value_); }

LogScale LogScale::pow(double a) const {
  if (!(a > 0.0)) throw InputError("LogScale::pow needs a positive exponent");
  return log().scale(a).exp();
}

LogScale LogScale::add(double c) const {
  if (level_ == 0) return LogScale(value_ + c);
  if (level_ == 1) {
    const double r = c * std::exp(-value_);
    return tower(1, value_ + std::log1p(r));
  }
  return *this;
}

LogScale LogScale::scale(double a) const {
  if (!(a > 0.0)) throw InputError("LogScale::scale needs a positive factor");
  if (level_ == 0) {
    const double p = value_ * a;
    if (std::isfinite(p)) return LogScale(p);
    return tower(1, std::log(value_) + std::log(a));
  }
  return tower(level_ - 1, value_).add(std::log(a)).exp();
}

double LogScale::log_double() const {
  if (level_ == 0) return std::log(value_);
  if (level_ == 1) return value_;
  return std::numeric_limits<double>::infinity();
}

double LogScale::to_double() const {
  return level_ == 0 ? value_ : std::numeric_limits<double>::infinity();
}

std::string LogScale::to_string() const {
  char buf[64];
  if (level_ == 0) std::snprintf(buf, sizeof buf, "%.17g", value_);
  else std::snprintf(buf, sizeof buf, "exp^%d(%.17g)", level_, value_);
  return buf;
}

std::partial_ordering operator<=>(const LogScale& a, const LogScale& b) {
  if (a.level_ != b.level_) return a.level_ <=> b.level_;
  return a.value_ <=> b.value_;
}

}  // namespace qpl
