#pragma once

#include <stdexcept>
#include <string>

namespace bodyflow {

// Bad input: malformed files, dimension mismatches, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerics failed: singular systems, blow-up, step limits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bodyflow
