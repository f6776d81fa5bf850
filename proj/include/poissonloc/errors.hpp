#pragma once

#include <stdexcept>
#include <string>

namespace poissonloc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File or stream failure (distinct exit code in the CLI).
struct IoError : Error {
    using Error::Error;
};

/// An argument lies outside the domain an operation is defined on.
struct DomainError : Error {
    using Error::Error;
};

/// A candidate source position lies inside a sensor's exclusion ball.
struct ExclusionViolation : Error {
    using Error::Error;
};

/// An operation requiring the constant signal form received a tabulated one
/// (or vice versa).
struct FormError : Error {
    using Error::Error;
};

/// Trilateration geometry is numerically singular (sensors aligned).
struct SingularGeometry : Error {
    using Error::Error;
};

/// Posterior mass vanished entirely (all grid cells excluded).
struct DegenerateMass : Error {
    using Error::Error;
};

/// Experiment configuration is invalid; message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

/// Monte Carlo standard error too large relative to the point estimate.
struct InsufficientReplications : Error {
    using Error::Error;
};

}  // namespace poissonloc
