// model.hpp: physical parameters of the charger/battery pair, drive envelopes,
// coupling window and bath occupation

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "qbattery/errors.hpp"

namespace qbattery {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// All quantities in units of omega0 (hbar = 1); times in units of 1/omega0.
struct ModelParams {
    double omega0{1.0};  // frequency of both oscillators
    double g{0.2};       // charger-battery coupling
    double gamma{1.0};   // charger decay rate
    double nbar{0.0};    // mean bath occupation
    double delta_r{0.0}; // detuning omega0 - omega_d
    double tau{1.0};     // charging duration (coupling switched off afterwards)

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!(finite(omega0) && finite(g) && finite(gamma) && finite(nbar) && finite(delta_r) && finite(tau)))
            throw ConfigError("model parameters must be finite");
        if (!(omega0 > 0.0)) throw ConfigError("omega0 must be > 0");
        if (g < 0.0) throw ConfigError("g must be >= 0");
        if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
        if (nbar < 0.0) throw ConfigError("nbar must be >= 0");
        if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
    }
};

// kappa = omega_d / omega0, so delta_r = omega0 (1 - kappa).
inline double detuning_from_kappa(double kappa, double omega0) { return omega0 * (1.0 - kappa); }

enum class DriveKind { Off, Static, SinSq, CdSinSq };

struct DriveProfile {
    DriveKind kind{DriveKind::Off};
    double F0{0.0};
    double omega_env{0.0};

    static DriveProfile off() { return {}; }
    static DriveProfile constant(double F0) { return {DriveKind::Static, F0, 0.0}; }
    static DriveProfile sin_sq(double F0, double omega_env) { return {DriveKind::SinSq, F0, omega_env}; }
    static DriveProfile cd_sin_sq(double F0, double omega_env) { return {DriveKind::CdSinSq, F0, omega_env}; }

    bool has_envelope() const { return kind == DriveKind::SinSq || kind == DriveKind::CdSinSq; }

    void validate() const {
        if (!std::isfinite(F0) || F0 < 0.0) throw ConfigError("F0 must be finite and >= 0");
        if (has_envelope() && !(omega_env > 0.0 && std::isfinite(omega_env)))
            throw ConfigError("omega_env must be > 0 for sin^2 envelopes");
    }
};

inline std::string_view to_string(DriveKind k) {
    switch (k) {
    case DriveKind::Off: return "off";
    case DriveKind::Static: return "static";
    case DriveKind::SinSq: return "sin_sq";
    case DriveKind::CdSinSq: return "cd_sin_sq";
    }
    return "off";
}

inline DriveKind drive_kind_from_string(std::string_view s) {
    if (s == "off") return DriveKind::Off;
    if (s == "static") return DriveKind::Static;
    if (s == "sin_sq") return DriveKind::SinSq;
    if (s == "cd_sin_sq") return DriveKind::CdSinSq;
    throw ConfigError("unknown drive profile '" + std::string(s) + "'");
}

// Bose-Einstein occupation 1/(exp(omega0/kT) - 1); zero-temperature limit is 0.
inline double bose_occupation(double omega0, double kT) {
    if (kT <= 0.0) return 0.0;
    return 1.0 / std::expm1(omega0 / kT);
}

inline double coupling_window(double t, double tau) { return (t >= 0.0 && t <= tau) ? 1.0 : 0.0; }

// Bare envelope F(t). The CD correction is added by cd_control, not here.
inline double envelope(double t, const DriveProfile& p) {
    switch (p.kind) {
    case DriveKind::Off: return 0.0;
    case DriveKind::Static: return p.F0;
    case DriveKind::SinSq:
    case DriveKind::CdSinSq: {
        const double s = std::sin(p.omega_env * t);
        return p.F0 * s * s;
    }
    }
    return 0.0;
}

// dF/dt evaluated analytically: F0 omega sin(2 omega t) for the sin^2 family.
inline double envelope_rate(double t, const DriveProfile& p) {
    if (!p.has_envelope()) return 0.0;
    return p.F0 * p.omega_env * std::sin(2.0 * p.omega_env * t);
}

} // namespace qbattery
