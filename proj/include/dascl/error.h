#pragma once

#include <stdexcept>
#include <string>

namespace dascl {

// Raised when inputs violate a documented precondition or schema. The CLI
// maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised for failures that happen while doing work (I/O, non-finite
// numerics). The CLI maps these to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dascl
