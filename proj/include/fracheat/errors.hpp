#pragma once

#include <stdexcept>
#include <string>

namespace fracheat {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Invalid configuration or input; the message starts with the offending field path.
struct ConfigError : Error {
    ConfigError(const std::string& field_path, const std::string& message)
        : Error(field_path + ": " + message) {}
};

/// f failed the monotonicity / positivity sampling check.
struct NonMonotoneError : Error {
    using Error::Error;
};

/// The tail integral of 1/f does not converge (superlinearity hypothesis fails).
struct TailDivergentError : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of the requested quantity.
struct DomainError : Error {
    using Error::Error;
};

/// Root bracketing could not enclose a sign change within the search range.
struct BracketFailureError : Error {
    using Error::Error;
};

/// A quadrature self-check (step halving / tail extrapolation) did not converge.
struct QuadratureFailureError : Error {
    using Error::Error;
};

/// The sampled limit sequence failed its convergence test.
struct NoLimitError : Error {
    using Error::Error;
};

/// A two-sided comparison exceeded the admissible constant.
struct BoundViolationError : Error {
    using Error::Error;
};

/// Declared singularity is too strong to be locally integrable on the grid.
struct NonIntegrableSingularityError : Error {
    using Error::Error;
};

/// Too much kernel mass leaves the computational window at the requested time.
struct WindowTooSmallError : Error {
    using Error::Error;
};

/// The admissible exponent window (q_f - 1, min{q_f, N/theta}) is empty.
struct BetaWindowEmptyError : Error {
    using Error::Error;
};

/// Verdicts along a dilation sweep were not monotone in lambda.
struct NonMonotoneSweepError : Error {
    using Error::Error;
};

/// A blow-up time was requested for a run that never crossed the cap.
struct NotBlowingUpError : Error {
    using Error::Error;
};

/// Filesystem / serialization failure.
struct IoError : Error {
    using Error::Error;
};

} // namespace fracheat
