#pragma once

#include <stdexcept>

namespace lossy {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input: bad dimensions, invalid probabilities, unknown labels.
struct SchemaError : Error {
  using Error::Error;
};

// No code can meet the excess-distortion budget for this instance.
struct InfeasibleError : Error {
  using Error::Error;
};

// A product alphabet would exceed the configured size budget.
struct BudgetError : Error {
  using Error::Error;
};

// An iterative solver failed to reach its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace lossy
