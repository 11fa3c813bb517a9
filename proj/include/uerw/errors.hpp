#pragma once

#include <stdexcept>
#include <string>

namespace uerw {

// Input/data validation failures. CLI maps these to exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (non-finite loss, degenerate geometry during optimization).
// CLI maps these to exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace uerw
