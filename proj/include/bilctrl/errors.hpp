#pragma once

#include <stdexcept>
#include <string>

namespace bilctrl {

/// Base class for all library errors.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A time-stepped field picked up a NaN/Inf entry (usually dt too large).
class NonFiniteState final : public Error {
  using Error::Error;
};

/// Requested control volume outside (0, 2*pi).
class InfeasibleVolume final : public Error {
  using Error::Error;
};

/// The restricted trigonometric basis on the support set is rank-deficient
/// (support too small for the requested mode cutoff).
class DegenerateSupport final : public Error {
  using Error::Error;
};

/// Time step too coarse to resolve the fastest retained transient.
class ResolutionExceeded final : public Error {
  using Error::Error;
};

/// Backtracking line search exhausted its halvings without improving
/// the objective.
class StalledLineSearch final : public Error {
  using Error::Error;
};

/// A sampled model-hypothesis assertion failed.
class HypothesisViolation final : public Error {
  using Error::Error;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError final : public Error {
  using Error::Error;
};

}  // namespace bilctrl
