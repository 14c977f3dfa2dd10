#pragma once

#include <stdexcept>
#include <string>

namespace nullknot {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A declared denominator vanished (within tolerance) at the evaluation point.
struct PoleError : Error {
  using Error::Error;
};

/// Energy density W below the degeneracy threshold; V = E x B / W undefined.
struct DegenerateFlowError : Error {
  using Error::Error;
};

/// A diagnostic requiring nullness was asked at a point that is not null.
struct NotNullError : Error {
  using Error::Error;
};

/// Grid data failed the spectral divergence-free check.
struct NotDivergenceFreeError : Error {
  using Error::Error;
};

/// The k = 0 (mean) mode must vanish for a potential solve.
struct NonzeroMeanError : Error {
  using Error::Error;
};

/// Phase gradient requested at a zero of alpha or beta.
struct ZeroModulusError : Error {
  using Error::Error;
};

/// The phase eta = arg(psi) requested at a zero (or pole) of psi.
struct ZeroPsiError : Error {
  using Error::Error;
};

/// g grad(chi) + h grad(eta) too small to normalize.
struct DegenerateDirectionError : Error {
  using Error::Error;
};

/// Field-line seed placed where the selected vector is degenerate.
struct DegenerateSeedError : Error {
  using Error::Error;
};

/// Adaptive tracer could not meet its tolerance.
struct StepFailureError : Error {
  using Error::Error;
};

/// Newton iteration failed to converge; message carries the final residual.
struct NoConvergenceError : Error {
  using Error::Error;
};

/// Newton Jacobian (numerically) singular.
struct SingularJacobianError : Error {
  using Error::Error;
};

/// Continuation jumped branches between consecutive points.
struct BranchJumpError : Error {
  using Error::Error;
};

/// CLI / config file schema violation.
struct ConfigError : Error {
  using Error::Error;
};

/// File read/write failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace nullknot
