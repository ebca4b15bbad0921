#pragma once

#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace blockwalk {

// Error taxonomy. The CLI maps these to process exit codes:
// ValidationError -> 1, NumericError -> 2, IoError -> 3.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sampling produced a vertex with no neighbors. Retryable with a new seed,
// unlike a parameter ValidationError.
class IsolatedNodeError : public ValidationError {
  using ValidationError::ValidationError;
};

// Each distinct message is printed once per process; sweeps would otherwise
// repeat the same regime warning hundreds of times.
inline void warn(const std::string& message) {
  static std::unordered_set<std::string> seen;
  if (seen.insert(message).second)
    std::cerr << "warning: " << message << '\n';
}

// 17 significant digits round-trip any double exactly; used for all
// CSV/config output so reruns are byte-identical.
inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace blockwalk
