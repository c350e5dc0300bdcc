// cd_control.hpp: counterdiabatic control fields
//
// Two constructions live here:
//  * the displaced-frame CD drive for the damped driven oscillator,
//    F_CD(t) = F(t) - i F'(t) / (delta_r - i gamma/2), which is what the battery dynamics consume;
//  * transitionless driving for a sampled closed-system Hamiltonian H0(t),
//    H_CD = i sum_n (|dn><n| - <n|dn>|n><n|), built from gauge-fixed eigenvectors by finite differences.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qbattery/errors.hpp"
#include "qbattery/model.hpp"

namespace qbattery::cd {

struct CdDriveSample {
    double t{0.0};
    cplx F_cd{0.0};
    double F_bare{0.0};
    cplx correction{0.0}; // F_cd - F_bare
};

inline cplx cd_denominator(double delta_r, double gamma) {
    const cplx den{delta_r, -0.5 * gamma};
    if (std::abs(den) == 0.0)
        throw SingularDenominator("delta_r - i*gamma/2 vanishes (delta_r = 0 and gamma = 0)");
    return den;
}

// Bare envelope plus CD correction. Profiles other than CdSinSq carry no correction.
inline CdDriveSample cd_field(double t, const DriveProfile& profile, double delta_r, double gamma) {
    CdDriveSample s;
    s.t = t;
    s.F_bare = envelope(t, profile);
    if (profile.kind == DriveKind::CdSinSq) {
        const cplx den = cd_denominator(delta_r, gamma);
        s.correction = cplx{0.0, -1.0} * envelope_rate(t, profile) / den;
    }
    s.F_cd = s.F_bare + s.correction;
    return s;
}

// Complex amplitude multiplying a^dagger in the interaction-picture Hamiltonian.
inline cplx drive_amplitude(double t, const DriveProfile& profile, const ModelParams& p) {
    if (profile.kind == DriveKind::CdSinSq) return cd_field(t, profile, p.delta_r, p.gamma).F_cd;
    return envelope(t, profile);
}

// Instantaneous steady-state displacement i F(t) / (delta_r - i gamma/2).
inline cplx steady_displacement(double t, const DriveProfile& profile, double delta_r, double gamma) {
    const cplx den = cd_denominator(delta_r, gamma);
    return cplx{0.0, 1.0} * envelope(t, profile) / den;
}

// Coefficient c of the displaced-frame CD term H_CD = c a^dagger + h.c.,
// c = -i F'(t) / (delta_r - i gamma/2). Kept for reference next to cd_field.
inline cplx displaced_frame_cd_coefficient(double t, const DriveProfile& profile, double delta_r, double gamma) {
    const cplx den = cd_denominator(delta_r, gamma);
    return cplx{0.0, -1.0} * envelope_rate(t, profile) / den;
}

// ---------------------------------------------------------------------------
// Closed-system transitionless driving

struct HermitianTrajectorySample {
    double t{0.0};
    Eigen::MatrixXcd H;
};

struct ClosedCdOptions {
    double gap_tolerance{1e-8};
    double min_overlap{0.9};   // adjacent-sample eigenvector overlap below this -> GridTooCoarse
    double grid_tolerance{1e-9}; // relative tolerance on uniform spacing
};

// Eigenvectors (columns, ascending eigenvalue) for every sample, without gauge fixing.
inline std::vector<Eigen::MatrixXcd> eigenframes(const std::vector<HermitianTrajectorySample>& samples,
                                                 const ClosedCdOptions& opts = {}) {
    std::vector<Eigen::MatrixXcd> frames;
    frames.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.H.rows() != s.H.cols() || s.H.rows() == 0)
            throw ConfigError("Hamiltonian samples must be non-empty square matrices");
        if ((s.H - s.H.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigError("Hamiltonian sample is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.H);
        const auto& ev = es.eigenvalues();
        for (Eigen::Index k = 1; k < ev.size(); ++k) {
            if (ev[k] - ev[k - 1] < opts.gap_tolerance)
                throw DegenerateSpectrum("spectral gap " + std::to_string(ev[k] - ev[k - 1]) + " at t = " +
                                         std::to_string(s.t));
        }
        frames.push_back(es.eigenvectors());
    }
    return frames;
}

// Smooth gauge: first frame has its largest component of each vector real positive; every later
// vector is rephased so its overlap with the previous one is real positive.
inline void fix_gauge(std::vector<Eigen::MatrixXcd>& frames, const ClosedCdOptions& opts = {}) {
    if (frames.empty()) return;
    auto& first = frames.front();
    for (Eigen::Index n = 0; n < first.cols(); ++n) {
        Eigen::Index imax = 0;
        first.col(n).cwiseAbs().maxCoeff(&imax);
        const cplx c = first(imax, n);
        first.col(n) *= std::conj(c) / std::abs(c);
    }
    for (std::size_t k = 1; k < frames.size(); ++k) {
        for (Eigen::Index n = 0; n < frames[k].cols(); ++n) {
            const cplx ov = frames[k - 1].col(n).dot(frames[k].col(n));
            if (std::abs(ov) < opts.min_overlap)
                throw GridTooCoarse("eigenvector overlap " + std::to_string(std::abs(ov)) + " between samples " +
                                    std::to_string(k - 1) + " and " + std::to_string(k));
            frames[k].col(n) *= std::conj(ov) / std::abs(ov);
        }
    }
}

// H_CD from gauge-fixed frames on a uniform grid of spacing h. Central differences inside,
// second-order one-sided differences at the ends. The Hermitian part is returned.
inline std::vector<Eigen::MatrixXcd> cd_from_frames(const std::vector<Eigen::MatrixXcd>& frames, double h) {
    const std::size_t n = frames.size();
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(n);
    const cplx I{0.0, 1.0};
    for (std::size_t k = 0; k < n; ++k) {
        Eigen::MatrixXcd dV;
        if (k == 0)
            dV = (-3.0 * frames[0] + 4.0 * frames[1] - frames[2]) / (2.0 * h);
        else if (k + 1 == n)
            dV = (3.0 * frames[n - 1] - 4.0 * frames[n - 2] + frames[n - 3]) / (2.0 * h);
        else
            dV = (frames[k + 1] - frames[k - 1]) / (2.0 * h);
        const Eigen::MatrixXcd& V = frames[k];
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(V.rows(), V.rows());
        for (Eigen::Index m = 0; m < V.cols(); ++m) {
            const cplx berry = V.col(m).dot(dV.col(m)); // <n|dn>
            H += I * (dV.col(m) * V.col(m).adjoint() - berry * V.col(m) * V.col(m).adjoint());
        }
        out.push_back(0.5 * (H + H.adjoint()));
    }
    return out;
}

inline std::vector<HermitianTrajectorySample> cd_hamiltonian_closed(const std::vector<HermitianTrajectorySample>& samples,
                                                                    const ClosedCdOptions& opts = {}) {
    if (samples.size() < 3) throw ConfigError("closed-system CD needs at least 3 samples");
    const double h = samples[1].t - samples[0].t;
    if (!(h > 0.0)) throw ConfigError("sample times must be strictly increasing");
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double hk = samples[k].t - samples[k - 1].t;
        if (std::abs(hk - h) > opts.grid_tolerance * std::max(1.0, std::abs(h)))
            throw ConfigError("sample times must lie on a uniform grid");
    }
    auto frames = eigenframes(samples, opts);
    fix_gauge(frames, opts);
    auto hcd = cd_from_frames(frames, h);
    std::vector<HermitianTrajectorySample> out;
    out.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) out.push_back({samples[k].t, std::move(hcd[k])});
    return out;
}

// ---------------------------------------------------------------------------
// Two-level avoided crossing H0 = (Delta sx + lambda(t) sz)/2 with a linear sweep of lambda.

struct TwoLevelSweep {
    double Delta{1.0};
    double lambda_start{-10.0};
    double lambda_end{10.0};
    double duration{2.0};
    int samples{4001};

    double lambda(double t) const { return lambda_start + (lambda_end - lambda_start) * t / duration; }
    double rate() const { return (lambda_end - lambda_start) / duration; }
};

inline Eigen::Matrix2cd pauli_x() { return (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(); }
inline Eigen::Matrix2cd pauli_y() {
    return (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
}
inline Eigen::Matrix2cd pauli_z() { return (Eigen::Matrix2cd() << 1, 0, 0, -1).finished(); }

inline std::vector<HermitianTrajectorySample> two_level_samples(const TwoLevelSweep& sw) {
    std::vector<HermitianTrajectorySample> out;
    out.reserve(static_cast<std::size_t>(sw.samples));
    const double h = sw.duration / (sw.samples - 1);
    for (int k = 0; k < sw.samples; ++k) {
        const double t = k * h;
        out.push_back({t, 0.5 * (sw.Delta * pauli_x() + sw.lambda(t) * pauli_z())});
    }
    return out;
}

struct TransitionlessReport {
    double final_fidelity_bare{0.0};
    double min_fidelity_bare{1.0};
    double final_fidelity_cd{0.0};
    double min_fidelity_cd{1.0};
};

namespace detail {
inline Eigen::MatrixXcd unitary_step(const Eigen::MatrixXcd& H, double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXcd phases = (cplx(0.0, -dt) * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::VectorXcd ground_state(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    return es.eigenvectors().col(0);
}
} // namespace detail

// Propagate the instantaneous ground state under H0 alone and under H0 + H_CD. Each grid interval
// uses the exact exponential of the interval-averaged Hamiltonian.
inline TransitionlessReport transitionless_demo(const TwoLevelSweep& sweep, const ClosedCdOptions& opts = {}) {
    const auto h0 = two_level_samples(sweep);
    const auto hcd = cd_hamiltonian_closed(h0, opts);
    TransitionlessReport rep;
    Eigen::VectorXcd psi_bare = detail::ground_state(h0.front().H);
    Eigen::VectorXcd psi_cd = psi_bare;
    for (std::size_t k = 1; k < h0.size(); ++k) {
        const double dt = h0[k].t - h0[k - 1].t;
        const Eigen::MatrixXcd Hb = 0.5 * (h0[k].H + h0[k - 1].H);
        const Eigen::MatrixXcd Hc = Hb + 0.5 * (hcd[k].H + hcd[k - 1].H);
        psi_bare = detail::unitary_step(Hb, dt) * psi_bare;
        psi_cd = detail::unitary_step(Hc, dt) * psi_cd;
        const Eigen::VectorXcd gs = detail::ground_state(h0[k].H);
        const double fb = std::norm(gs.dot(psi_bare));
        const double fc = std::norm(gs.dot(psi_cd));
        rep.min_fidelity_bare = std::min(rep.min_fidelity_bare, fb);
        rep.min_fidelity_cd = std::min(rep.min_fidelity_cd, fc);
        rep.final_fidelity_bare = fb;
        rep.final_fidelity_cd = fc;
    }
    return rep;
}

} // namespace qbattery::cd
