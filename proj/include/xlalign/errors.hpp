#pragma once

#include <stdexcept>
#include <string>

namespace xlalign {

// Invalid configuration or parameter value (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent input data: missing files, malformed records,
// shape mismatches, empty overlaps (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-convergence, divergence, singular systems
// (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace xlalign
