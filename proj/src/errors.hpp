#pragma once

#include <stdexcept>

namespace gdiff {

// Filesystem and serialization failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or numerical breakdown during computation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A verification check evaluated cleanly and failed.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gdiff
