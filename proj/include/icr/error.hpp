#pragma once

#include <stdexcept>
#include <string>

namespace icr {

enum class ErrorKind {
  Parse,
  DimensionMismatch,
  NonFinite,
  InvalidArgument,
  DifferentNetwork,
  Widening,
  EmptyStack,
  Numerical,
  CapExceeded,
  InvalidBracket,
  CannotSplit,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace icr
