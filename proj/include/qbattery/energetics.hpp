// energetics.hpp: stored energy, Gaussian ergotropy and the thermal/coherent split

#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <vector>

#include "qbattery/dynamics.hpp"
#include "qbattery/errors.hpp"
#include "qbattery/model.hpp"

namespace qbattery {

struct EnergyReport {
    double e_b{0.0};         // omega0 <b^dag b>
    double ergotropy_b{0.0}; // extractable work from the reduced battery state
    double passive_b{0.0};   // e_b - ergotropy_b
    double m_value{1.0};     // M of the Gaussian ergotropy formula
    double e_a{0.0};         // omega0 |<a>|^2
};

inline constexpr double kErgotropyClamp = 1e-9;
inline constexpr double kUnphysicalM = 1e-6;

inline double energy_b(const MomentState& s, double omega0) { return omega0 * s.nb; }

inline double energy_a(cplx alpha, double omega0) { return omega0 * std::norm(alpha); }

// M = (1 + 2<b^dag b> - 2|<b>|^2)^2 - 4|<b^2> - <b>^2|^2, ergotropy = omega0 (<b^dag b> - (sqrt(M) - 1)/2).
inline EnergyReport ergotropy_b(const MomentState& s, double omega0) {
    const double centered_n = s.nb - std::norm(s.b_mean);
    const cplx centered_sq = s.b_sq - s.b_mean * s.b_mean;
    // M - 1 formed directly; (sqrt(M) - 1)/2 = (M - 1) / (2 (sqrt(M) + 1)) avoids cancellation near M = 1
    const double m_minus_1 = 4.0 * centered_n * (1.0 + centered_n) - 4.0 * std::norm(centered_sq);
    const double M = 1.0 + m_minus_1;
    // Centered moments are differences of O(nb) numbers, so both tolerances grow with the occupation.
    const double scale = std::max(1.0, std::abs(s.nb));
    if (!(M >= 1.0 - kUnphysicalM * scale)) throw UnphysicalState("Gaussian M = " + std::to_string(M) + " < 1");

    EnergyReport r;
    r.m_value = M;
    r.e_b = energy_b(s, omega0);
    r.e_a = energy_a(s.a_mean, omega0);
    double passive = omega0 * 0.5 * std::max(m_minus_1, 0.0) / (std::sqrt(std::max(M, 1.0)) + 1.0);
    double erg = r.e_b - passive;
    if (erg < 0.0) {
        if (erg < -kErgotropyClamp * scale * omega0)
            throw UnphysicalState("negative ergotropy " + std::to_string(erg));
        erg = 0.0;
        passive = r.e_b;
    }
    r.ergotropy_b = erg;
    r.passive_b = passive;
    return r;
}

inline std::vector<EnergyReport> energy_series(const Trajectory& tr) {
    std::vector<EnergyReport> out;
    out.reserve(tr.samples.size());
    for (const auto& s : tr.samples) out.push_back(ergotropy_b(s.state, tr.params.omega0));
    return out;
}

struct Decomposition {
    std::vector<double> times;
    std::vector<EnergyReport> total;    // (F, T)
    std::vector<EnergyReport> thermal;  // (F = 0, T)
    std::vector<EnergyReport> coherent; // (F, T = 0)
    double additivity_residual{0.0};    // max |E_total - E_thermal - E_coherent|
    double ergotropy_residual{0.0};     // max |W_total - W_coherent|
    double coherent_energy_residual{0.0}; // max |W_total - E_coherent|
    double thermal_ergotropy_max{0.0};  // max W_thermal
};

inline constexpr double kDecompositionTolerance = 1e-6;

// Runs the (F,T), (F=0,T) and (F,T=0) trajectories and checks energy additivity and that only the
// coherent part carries ergotropy.
inline Decomposition decompose(const ModelParams& params, const DriveProfile& profile, double step, double t_end,
                               const IntegrateOptions& opts = {}) {
    ModelParams cold = params;
    cold.nbar = 0.0;
    auto run = [&](const ModelParams& p, const DriveProfile& d) { return integrate(p, d, step, t_end, opts); };
    auto f_total = std::async(std::launch::async, run, params, profile);
    auto f_thermal = std::async(std::launch::async, run, params, DriveProfile::off());
    const Trajectory coherent = run(cold, profile);
    const Trajectory total = f_total.get();
    const Trajectory thermal = f_thermal.get();

    Decomposition d;
    d.total = energy_series(total);
    d.thermal = energy_series(thermal);
    d.coherent = energy_series(coherent);
    d.times.reserve(total.samples.size());
    for (std::size_t k = 0; k < total.samples.size(); ++k) {
        d.times.push_back(total.samples[k].t);
        const auto &T = d.total[k], &H = d.thermal[k], &C = d.coherent[k];
        d.additivity_residual = std::max(d.additivity_residual, std::abs(T.e_b - H.e_b - C.e_b));
        d.ergotropy_residual = std::max(d.ergotropy_residual, std::abs(T.ergotropy_b - C.ergotropy_b));
        d.coherent_energy_residual = std::max(d.coherent_energy_residual, std::abs(T.ergotropy_b - C.e_b));
        d.thermal_ergotropy_max = std::max(d.thermal_ergotropy_max, std::abs(H.ergotropy_b));
    }
    if (d.additivity_residual > kDecompositionTolerance)
        throw DecompositionMismatch("stored energy is not additive over thermal and coherent parts",
                                    d.additivity_residual);
    if (d.ergotropy_residual > kDecompositionTolerance)
        throw DecompositionMismatch("ergotropy differs from the coherent-only ergotropy", d.ergotropy_residual);
    return d;
}

} // namespace qbattery
