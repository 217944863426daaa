#pragma once

#include <stdexcept>
#include <string>

namespace plod {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Factorization breakdown, rank deficiency or missed residual tolerance.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A computed object violates one of its defining identities.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Time stepping aborted by the divergence guard.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int step) : Error(what), step_(step) {}
    [[nodiscard]] int step() const noexcept { return step_; }

private:
    int step_;
};

/// Malformed configuration or cache file.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace plod
