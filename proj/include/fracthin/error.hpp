#pragma once

#include <stdexcept>
#include <string>

namespace fracthin {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid geometry, shape mismatch, malformed or unknown configuration keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (negative power, NaN input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Quadrature or another inner numerical procedure failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared in the solver state or flux.
class BlowUpError : public Error {
public:
    BlowUpError(double time, double max_abs_u, const std::string& what)
        : Error(what), time_(time), max_abs_u_(max_abs_u) {}

    double time() const noexcept { return time_; }
    double max_abs_u() const noexcept { return max_abs_u_; }

private:
    double time_;
    double max_abs_u_;
};

/// The adaptive stepper needed a step below dt_min.
class StiffnessError : public Error {
public:
    StiffnessError(double time, double dt, const std::string& what)
        : Error(what), time_(time), dt_(dt) {}

    double time() const noexcept { return time_; }
    double dt() const noexcept { return dt_; }

private:
    double time_;
    double dt_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class InconsistentSupportError : public Error {
public:
    using Error::Error;
};

}  // namespace fracthin
