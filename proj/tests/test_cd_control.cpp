#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qbattery/cd_control.hpp"

using namespace qbattery;
using namespace qbattery::cd;

TEST(CdField, VanishesAtStart) {
    const auto s = cd_field(0.0, DriveProfile::cd_sin_sq(0.8, 1.3), 0.4, 1.0);
    EXPECT_EQ(std::abs(s.F_cd), 0.0);
}

TEST(CdField, EqualsPeakWhereRateVanishes) {
    const double w = 1.3;
    const auto s = cd_field(kPi / 2 / w, DriveProfile::cd_sin_sq(0.8, w), 0.4, 1.0);
    EXPECT_NEAR(s.F_cd.real(), 0.8, 1e-14);
    EXPECT_NEAR(s.F_cd.imag(), 0.0, 1e-14);
}

TEST(CdField, SymbolicSubstitution) {
    // F = 0.5, F' = 1, -i * 1 / (-i) = 1
    const auto s = cd_field(kPi / 4, DriveProfile::cd_sin_sq(1.0, 1.0), 0.0, 2.0);
    EXPECT_NEAR(s.F_cd.real(), 1.5, 1e-14);
    EXPECT_NEAR(s.F_cd.imag(), 0.0, 1e-14);
    EXPECT_EQ(s.F_cd, s.F_bare + s.correction);
}

TEST(CdField, NoCorrectionForOtherProfiles) {
    EXPECT_EQ(cd_field(0.7, DriveProfile::sin_sq(1.0, 1.0), 0.0, 0.0).correction, cplx(0.0));
    EXPECT_EQ(cd_field(0.7, DriveProfile::constant(1.0), 0.0, 0.0).F_cd, cplx(1.0));
}

TEST(CdField, SingularDenominator) {
    EXPECT_THROW(cd_field(0.3, DriveProfile::cd_sin_sq(1.0, 1.0), 0.0, 0.0), SingularDenominator);
    EXPECT_THROW(steady_displacement(0.3, DriveProfile::constant(1.0), 0.0, 0.0), SingularDenominator);
}

TEST(CdField, CorrectionBoundedByRateOverGamma) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> t(0.0, 40.0);
    const double F0 = 0.7, w = 1.7;
    for (double gamma : {1.0, 10.0, 100.0, 1e4}) {
        for (int k = 0; k < 200; ++k) {
            const auto s = cd_field(t(rng), DriveProfile::cd_sin_sq(F0, w), 0.0, gamma);
            EXPECT_LE(std::abs(s.correction), 2 * F0 * w / gamma * (1 + 1e-12));
        }
    }
}

TEST(SteadyDisplacement, Substitution) {
    EXPECT_EQ(steady_displacement(1.0, DriveProfile::off(), 1.0, 0.0), cplx(0.0));
    const auto a = steady_displacement(1.0, DriveProfile::constant(1.0), 1.0, 0.0);
    EXPECT_NEAR(a.real(), 0.0, 1e-15);
    EXPECT_NEAR(a.imag(), 1.0, 1e-15);
    const auto b = steady_displacement(1.0, DriveProfile::constant(1.0), 0.0, 2.0);
    EXPECT_NEAR(b.real(), -1.0, 1e-15);
    EXPECT_NEAR(b.imag(), 0.0, 1e-15);
}

TEST(DisplacedFrame, CoefficientMatchesCorrection) {
    const auto p = DriveProfile::cd_sin_sq(0.6, 0.9);
    for (double t : {0.2, 1.1, 2.5}) {
        EXPECT_EQ(displaced_frame_cd_coefficient(t, p, 0.3, 0.8), cd_field(t, p, 0.3, 0.8).correction);
    }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<HermitianTrajectorySample> grid(int n, double t1, const std::function<Eigen::MatrixXcd(double)>& H) {
    std::vector<HermitianTrajectorySample> s;
    for (int k = 0; k < n; ++k) {
        const double t = t1 * k / (n - 1);
        s.push_back({t, H(t)});
    }
    return s;
}

Eigen::MatrixXcd three_level(double t) {
    Eigen::MatrixXcd H(3, 3);
    H << -1.0 + 0.3 * t, cplx(0.2, 0.1 * t), 0.05, cplx(0.2, -0.1 * t), 0.4 * std::sin(t), cplx(0.0, 0.3),
        0.05, cplx(0.0, -0.3), 1.5;
    return H;
}

} // namespace

TEST(ClosedCd, ConstantHamiltonianGivesZero) {
    const auto out = cd_hamiltonian_closed(grid(21, 2.0, [](double) { return three_level(0.7); }));
    for (const auto& s : out) EXPECT_LT(s.H.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClosedCd, IdentityShiftInvariant) {
    const auto a = cd_hamiltonian_closed(grid(101, 2.0, three_level));
    const auto b = cd_hamiltonian_closed(grid(101, 2.0, [](double t) {
        return Eigen::MatrixXcd(three_level(t) + (3.0 * t * t - 1.0) * Eigen::MatrixXcd::Identity(3, 3));
    }));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT((a[k].H - b[k].H).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ClosedCd, HermitianAndTraceless) {
    for (const auto& s : cd_hamiltonian_closed(grid(201, 3.0, three_level))) {
        EXPECT_LT((s.H - s.H.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(std::abs(s.H.trace()), 1e-10);
    }
}

TEST(ClosedCd, TwoLevelMatchesClosedForm) {
    // H0 = (Delta sx + lambda sz)/2 has H_CD = -Delta lambda' / (2 (Delta^2 + lambda^2)) sy.
    TwoLevelSweep sw;
    sw.samples = 2001;
    const auto out = cd_hamiltonian_closed(two_level_samples(sw));
    for (std::size_t k = 0; k < out.size(); k += 50) {
        const double lam = sw.lambda(out[k].t);
        const double coef = -sw.Delta * sw.rate() / (2.0 * (sw.Delta * sw.Delta + lam * lam));
        const Eigen::MatrixXcd expected = coef * pauli_y();
        EXPECT_LT((out[k].H - expected).cwiseAbs().maxCoeff(), 2e-3 * std::abs(coef) + 1e-9) << "t = " << out[k].t;
        // off-diagonal and purely imaginary in the sz basis
        EXPECT_LT(std::abs(out[k].H(0, 0)) + std::abs(out[k].H(1, 1)), 1e-10);
        EXPECT_LT(std::abs(out[k].H(0, 1).real()), 1e-9);
    }
}

TEST(ClosedCd, GaugeInvariance) {
    const auto samples = grid(301, 2.0, three_level);
    auto frames = eigenframes(samples);
    auto reference = frames;
    fix_gauge(reference);
    const auto h_ref = cd_from_frames(reference, samples[1].t - samples[0].t);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (auto& f : frames)
        for (Eigen::Index n = 0; n < f.cols(); ++n) f.col(n) *= std::polar(1.0, phase(rng));
    fix_gauge(frames);
    const auto h = cd_from_frames(frames, samples[1].t - samples[0].t);
    for (std::size_t k = 0; k < h.size(); ++k) EXPECT_LT((h[k] - h_ref[k]).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ClosedCd, Errors) {
    EXPECT_THROW(cd_hamiltonian_closed(grid(2, 1.0, three_level)), ConfigError);
    EXPECT_THROW(cd_hamiltonian_closed(grid(10, 1.0, [](double) { return Eigen::MatrixXcd::Identity(2, 2).eval(); })),
                 DegenerateSpectrum);
    auto uneven = grid(10, 1.0, three_level);
    uneven[4].t += 0.01;
    EXPECT_THROW(cd_hamiltonian_closed(uneven), ConfigError);
    // a sweep through the whole crossing in a handful of samples cannot be gauge tracked
    TwoLevelSweep coarse;
    coarse.Delta = 0.1;
    coarse.samples = 4;
    EXPECT_THROW(cd_hamiltonian_closed(two_level_samples(coarse)), GridTooCoarse);
}

TEST(Transitionless, FollowsInstantaneousEigenstate) {
    const auto rep = transitionless_demo(TwoLevelSweep{});
    EXPECT_GE(rep.min_fidelity_cd, 1.0 - 1e-4);
    EXPECT_LT(rep.final_fidelity_bare, 0.9);
}

TEST(Transitionless, HoldsAcrossSweepSpeeds) {
    for (double duration : {0.5, 2.0, 20.0}) {
        TwoLevelSweep sw;
        sw.duration = duration;
        sw.samples = 8001;
        EXPECT_GE(transitionless_demo(sw).min_fidelity_cd, 1.0 - 1e-4) << "duration " << duration;
    }
}
