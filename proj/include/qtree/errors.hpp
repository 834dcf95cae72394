#pragma once

#include <stdexcept>
#include <string>

namespace qtree {

/// Bad or inconsistent run parameters (CLI exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File-format or filesystem failures (CLI exit code 2).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: degenerate inputs, invariant violations (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qtree
