#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tdres {

/// Raised when a numerical procedure cannot deliver its contract (step
/// underflow, quadrature failure, series non-convergence, ...). Carries the
/// module and operation names so callers can report where it happened.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, std::string operation, const std::string& detail)
      : std::runtime_error(module + "::" + operation + ": " + detail),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

/// Raised when an input violates a documented precondition. `field()` names
/// the offending parameter.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& detail)
      : std::invalid_argument(field + ": " + detail), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace tdres
