#pragma once

#include <stdexcept>
#include <string>

namespace clustreg {

/// Broad failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  invalid_argument,   // caller passed something that violates a precondition
  dimension_mismatch,
  singular_component, // weighted cross-product matrix not invertible
  empty_component,    // a component carries zero posterior mass
  numerical,          // non-finite values or all restarts failed
  io,
  parse,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the M-step when a component cannot be re-estimated. The caller
/// decides whether to restart from a different initialization.
class ComponentError : public Error {
 public:
  ComponentError(ErrorKind kind, int component, const std::string& what)
      : Error(kind, what), component_(component) {}

  int component() const noexcept { return component_; }

 private:
  int component_;
};

}  // namespace clustreg
