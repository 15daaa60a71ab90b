#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ptspectra {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// ODE propagation failed (step underflow, non-finite values).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, cplx where)
        : Error(what), position_(where) {}
    cplx position() const noexcept { return position_; }

private:
    cplx position_;
};

/// An iterative solver did not converge; the message carries the trace.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Search contour passes too close to a zero of the analytic function.
class ContourError : public Error {
public:
    using Error::Error;
};

/// Persisted data does not match the expected schema version.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace ptspectra
