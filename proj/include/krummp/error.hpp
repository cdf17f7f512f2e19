#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace krummp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or a domain-type invariant was violated.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// sigma_K of the data matrix fell below the rank tolerance; the pencil does
/// not carry K well separated directions.
class DegenerateInput : public Error
{
public:
    DegenerateInput(const std::string& what, double sigma)
        : Error(what), sigma_(sigma)
    {
    }
    double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
};

/// A generalized eigenvalue collapsed to (numerically) zero, so it has no
/// phase to project onto the unit circle.
class ZeroEigenvalue : public Error
{
public:
    ZeroEigenvalue(const std::string& what, double modulus)
        : Error(what), modulus_(modulus)
    {
    }
    double modulus() const noexcept { return modulus_; }

private:
    double modulus_;
};

/// Deconvolution produced a non-finite value at the given frequency.
class StageFailure : public Error
{
public:
    StageFailure(const std::string& what, std::int64_t frequency)
        : Error(what), frequency_(frequency)
    {
    }
    std::int64_t frequency() const noexcept { return frequency_; }

private:
    std::int64_t frequency_;
};

/// Rejection sampling ran out of attempts.
class Infeasible : public Error
{
public:
    using Error::Error;
};

} // namespace krummp
