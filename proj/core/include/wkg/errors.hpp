#pragma once

#include <stdexcept>
#include <string>

namespace wkg {

// Argument outside the geometric domain (e.g. a point outside the cone).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Request outside stored data (history, slice, ray).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Word longer than the finite-difference tower supports.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hypothesis of a certifier not met, so the check is meaningless.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double t, double r)
      : std::runtime_error(what), t_(t), r_(r) {}
  double t() const { return t_; }
  double r() const { return r_; }

 private:
  double t_;
  double r_;
};

}  // namespace wkg
