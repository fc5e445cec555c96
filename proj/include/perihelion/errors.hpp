#pragma once

#include <stdexcept>
#include <string>

namespace perihelion {

// Typed failures. The CLI maps each family onto a process exit code.

/// Input outside the mathematical domain of an operation (collisions,
/// |G| > Lambda, r = 2 bifurcation, negative lift discriminant, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method hit its cap or stalled.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration left the region where the truncated series is trusted.
class SeriesDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive step size fell below the floor.
class StepCollapseError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// No section crossing inside the integration horizon.
class NoReturnError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// The energetic lift has no real momentum for the requested seed.
class LiftError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace perihelion
