#pragma once

#include <stdexcept>
#include <string>

namespace sgim {

// Violated precondition of an operation (bad argument, empty input, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Incompatible tensor or matrix shapes.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or a failed numerical procedure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double final_value)
      : NumericalError(what), final_value_(final_value) {}
  double final_value() const { return final_value_; }

 private:
  double final_value_;
};

}  // namespace sgim
