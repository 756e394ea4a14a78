#pragma once

#include <stdexcept>
#include <string>

namespace formstab {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Eigen-solver non-convergence and similar numerical breakdowns.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration, missing stations, dimension mismatches.
class ConfigError : public Error {
public:
    using Error::Error;
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

/// Ill-posed interconnection (algebraic loop, singular feedthrough).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// State-space to polynomial conversion was too ill-conditioned to trust.
class ConversionError : public Error {
public:
    ConversionError(const std::string& what, double condition)
        : Error(what + " (condition " + std::to_string(condition) + ")"), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class SynthesisError : public Error {
public:
    using Error::Error;
};

/// Simulation blew up; carries the aircraft index and time of detection.
class DivergenceError : public Error {
public:
    DivergenceError(int aircraft, double time)
        : Error("simulation diverged: aircraft " + std::to_string(aircraft) + " at t=" + std::to_string(time) + " s"),
          aircraft_(aircraft), time_(time) {}
    int aircraft() const noexcept { return aircraft_; }
    double time() const noexcept { return time_; }

private:
    int aircraft_;
    double time_;
};

} // namespace formstab
