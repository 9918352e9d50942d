#pragma once

#include <stdexcept>
#include <string>

namespace tnvqe {

// Invalid argument or out-of-range input (bad coordinates, size mismatch...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problem is well-formed but exceeds what a backend supports
// (e.g. a Hilbert-space dimension over the exact-diagonalization budget).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical self-consistency check failed (imaginary energy, gradient
// mismatch, fidelity above one...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration file or plan.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnvqe
