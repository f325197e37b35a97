#pragma once

#include <stdexcept>
#include <string>

namespace massbound {

/// Input violates a precondition (degenerate metric, c <= -1, R < 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not meet its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extrapolation to infinity did not converge; usually means the metric
/// decays too slowly for the requested accuracy.
class ExtrapolationError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Power-law fit refused (sign change, too few samples, zero data).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration; the message names the file, line and
/// field when they are known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace massbound
