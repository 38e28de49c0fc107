#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

// Base of every exception thrown by the library. The C API maps each
// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input to an operation (empty set, mismatched dimensions, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The mass vector does not satisfy s m = m, or no positive one exists.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// A workload cap (coefficient box, atom count, integer range) was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// An iteration hit its cap before reaching the tolerance.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, int iterations, double last_delta)
      : Error(what + " (iterations " + std::to_string(iterations) +
              ", last delta " + std::to_string(last_delta) + ")"),
        iterations_(iterations),
        last_delta_(last_delta) {}

  int iterations() const noexcept { return iterations_; }
  double last_delta() const noexcept { return last_delta_; }

 private:
  int iterations_;
  double last_delta_;
};

}  // namespace selfsim
