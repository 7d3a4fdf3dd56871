#pragma once

#include <stdexcept>
#include <string>

namespace ipmo {

/// Dimension mismatch between paths, forecasts, covariances or panels.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values or a singular linear system encountered mid-computation.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (e.g. differentiating at a
/// point that is not a converged fixed point).
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Neumann series terms stopped decaying; the step size is too large.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Strict complementarity does not hold; sensitivities are not well defined.
struct DegenerateInstanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A ground-truth oracle failed to reach its own tolerance.
struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Not enough history to estimate or train.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training diverged or too many inner solves failed.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the row/column location.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad or missing key in a run-configuration file.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ipmo
