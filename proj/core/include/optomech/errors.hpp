#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

/// Non-physical input (negative mass, zero frequency, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A formula was asked to operate outside the approximation it relies on,
/// e.g. the pulsed-regime state with g0*tau >= 0.5.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical procedure (quadrature, Fourier inversion, root bracketing)
/// failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The decoherence model produces no localization at the probed scale, so a
/// doubling time does not exist.
class NoDecoherenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested statistical precision cannot be met with the given sample size.
class SampleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace optomech
