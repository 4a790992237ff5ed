#pragma once

#include <stdexcept>
#include <string>

namespace ssldcm {

// Input data / schema / config problems. The CLI maps these to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite utilities, bad weight vectors and similar. Exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fewer observations than the coefficient count allows. CL/XCL catch this
// when enforcing their minimum-size guards.
struct UnderdeterminedModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SGD walked out of the representable range (theta norm guard).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ssldcm
