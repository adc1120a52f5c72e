#pragma once

#include <stdexcept>
#include <string>

namespace lstat {

// Bad input: duplicate frequencies, nonzero sums where zero is required, etc.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An enumeration or matrix size exceeds the configured cap.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Floating-point breakdown: singular determinant, negative kernel diagonal.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double magnitude = 0.0)
      : std::runtime_error(what), magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

}  // namespace lstat
