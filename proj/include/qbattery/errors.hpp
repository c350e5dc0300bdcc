// errors.hpp: exception types raised by the qbattery library

#pragma once

#include <stdexcept>
#include <string>

namespace qbattery {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration or parameter invariant broken by the caller.
struct ConfigError : Error {
    using Error::Error;
};

// Delta_r - i*gamma/2 vanishes, so the CD correction and steady displacement are undefined.
struct SingularDenominator : Error {
    using Error::Error;
};

struct DegenerateSpectrum : Error {
    using Error::Error;
};

// Eigenvector overlap between neighbouring samples too small to track the gauge.
struct GridTooCoarse : Error {
    using Error::Error;
};

struct StepTooLarge : Error {
    using Error::Error;
};

struct InvariantViolation : Error {
    using Error::Error;
};

// Population leaked into the top Fock levels of the truncated oracle.
struct TruncationLeak : Error {
    using Error::Error;
};

struct UnphysicalState : Error {
    using Error::Error;
};

struct ResonantEnvelope : Error {
    using Error::Error;
};

struct DecompositionMismatch : Error {
    DecompositionMismatch(const std::string& what, double residual)
        : Error(what + " (max residual " + std::to_string(residual) + ")"), max_residual(residual) {}
    double max_residual;
};

} // namespace qbattery
