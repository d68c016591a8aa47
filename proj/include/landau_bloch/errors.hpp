#pragma once

#include <stdexcept>
#include <string>

namespace landau_bloch {

/// Root of the library's exception hierarchy. Each leaf maps onto one of the
/// command-line exit codes (1 = configuration, 2 = numerical, 3 = verification).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept = 0;
};

/// Bad input: malformed files, out-of-range parameters, inconsistent data.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class GeometryError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A computation could not reach its accuracy contract (truncation too small,
/// quadrature not converged, defect above threshold, inadmissible index).
class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Quadrature failed to converge; carries the last error estimate.
class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double estimate)
        : NumericalError(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// A checked inequality or identity did not hold.
class VerificationError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

} // namespace landau_bloch
