#include <gtest/gtest.h>

#include <cmath>

#include "qbattery/oracle.hpp"

using namespace qbattery;
using namespace qbattery::oracle;

namespace {

ModelParams params(double g, double gamma, double nbar, double tau = 1e9) {
    ModelParams p;
    p.g = g;
    p.gamma = gamma;
    p.nbar = nbar;
    p.tau = tau;
    return p;
}

// Textbook dense construction of the master-equation right-hand side.
Eigen::MatrixXcd reference_rhs(double t, const Eigen::MatrixXcd& rho, const ModelParams& p, const DriveProfile& d,
                               Cutoffs c) {
    const Eigen::MatrixXcd a1 = annihilation(c.na), b1 = annihilation(c.nb);
    const Eigen::MatrixXcd Ia = Eigen::MatrixXcd::Identity(c.na, c.na), Ib = Eigen::MatrixXcd::Identity(c.nb, c.nb);
    auto kron = [](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
        Eigen::MatrixXcd out(x.rows() * y.rows(), x.cols() * y.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
        return out;
    };
    const Eigen::MatrixXcd a = kron(a1, Ib), b = kron(Ia, b1);
    const Eigen::MatrixXcd ad = a.adjoint(), bd = b.adjoint();
    const cplx F = cd::drive_amplitude(t, d, p);
    const double g = p.g * coupling_window(t, p.tau);
    const Eigen::MatrixXcd H = g * (a * bd + ad * b) + F * ad + std::conj(F) * a;
    const cplx I{0.0, 1.0};
    auto D = [&](const Eigen::MatrixXcd& L) {
        const Eigen::MatrixXcd LdL = L.adjoint() * L;
        return Eigen::MatrixXcd(L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
    };
    return -I * (H * rho - rho * H) + p.gamma * (p.nbar + 1) * D(a) + p.gamma * p.nbar * D(ad);
}

DenseState random_state(Cutoffs c, unsigned seed) {
    std::srand(seed);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Random(c.dim(), c.dim());
    Eigen::MatrixXcd rho = X * X.adjoint();
    rho /= rho.trace();
    return {RowMatrix(rho), c};
}

} // namespace

TEST(Liouvillian, MatchesTextbookConstruction) {
    const Cutoffs c{5, 4};
    for (const auto& drive : {DriveProfile::constant(0.4), DriveProfile::cd_sin_sq(0.3, 0.7)}) {
        const auto p = params(0.35, 0.6, 0.3);
        p.validate();
        const Liouvillian L(p, drive, c);
        const auto s = random_state(c, 17);
        const Eigen::MatrixXcd got = L(0.9, s.rho);
        const Eigen::MatrixXcd want = reference_rhs(0.9, Eigen::MatrixXcd(s.rho), p, drive, c);
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(DenseEvolve, VacuumStationary) {
    const auto out = dense_evolve(params(0.3, 1.0, 0.0), DriveProfile::off(), {6, 6}, 0.01, 5.0);
    for (const auto& s : out) {
        EXPECT_NEAR(std::abs(s.state.rho(0, 0) - cplx(1.0)), 0.0, 1e-15);
        EXPECT_NEAR(s.state.rho.cwiseAbs().sum(), 1.0, 1e-15);
    }
}

TEST(DenseEvolve, ChargerThermalizes) {
    DenseOptions o;
    o.stride = 100;
    const auto out = dense_evolve(params(0.0, 1.0, 1.0), DriveProfile::off(), {40, 4}, 0.01, 12.0, o);
    for (const auto& s : out) {
        const auto m = extract_moments(s.state);
        EXPECT_NEAR(m.na, 1.0 - std::exp(-s.t), 1e-7);
        EXPECT_EQ(physicality_problem(s.state), "");
    }
}

TEST(DenseEvolve, TracePreservedAndPhysical) {
    DenseOptions o;
    o.stride = 50;
    const auto out = dense_evolve(params(0.4, 0.05, 0.2), DriveProfile::cd_sin_sq(0.01, 1.0), {10, 10}, 0.01, 10.0, o);
    for (const auto& s : out) {
        EXPECT_NEAR(std::abs(s.state.rho.trace() - cplx(1.0)), 0.0, 1e-8);
        EXPECT_EQ(physicality_problem(s.state), "");
    }
}

TEST(DenseEvolve, LeakIsReported) {
    EXPECT_THROW(dense_evolve(params(0.3, 1.0, 0.0), DriveProfile::constant(2.0), {5, 5}, 0.01, 5.0), TruncationLeak);
}

TEST(DenseEvolve, Errors) {
    EXPECT_THROW(dense_evolve(params(0.3, 1.0, 0.0), DriveProfile::off(), {3, 6}, 0.01, 1.0), ConfigError);
}

TEST(ExtractMoments, Vacuum) {
    EXPECT_EQ(extract_moments(vacuum({6, 6})).max_abs_diff(MomentState{}), 0.0);
}

TEST(ExtractMoments, CoherentCharger) {
    const cplx alpha{0.6, -0.4};
    const int n = 30;
    const Eigen::VectorXcd psi = coherent_ket(alpha, n);
    const auto s = product_state(psi * psi.adjoint(), thermal_density(0.0, 5));
    const auto m = extract_moments(s);
    EXPECT_NEAR(std::abs(m.a_mean - alpha), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(m.na - std::norm(alpha)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(m.a_sq - alpha * alpha), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(m.b_mean), 0.0, 1e-15);
}

TEST(ExtractMoments, ThermalCharger) {
    const auto m = extract_moments(product_state(thermal_density(0.5, 60), thermal_density(0.0, 4)));
    EXPECT_NEAR(m.na, 0.5, 1e-10);
    EXPECT_EQ(std::abs(m.a_mean), 0.0);
    EXPECT_EQ(std::abs(m.a_sq), 0.0);
}

TEST(MomentAgreement, MatchesIntegrator) {
    const auto p = params(0.3, 1.0, 0.2);
    const auto drive = DriveProfile::constant(0.2);
    DenseOptions o;
    o.stride = 100;
    const auto dense = dense_evolve(p, drive, {14, 14}, 0.01, 10.0, o);
    IntegrateOptions io;
    io.stride = 100;
    const auto moments = integrate(p, drive, 0.01, 10.0, io);
    ASSERT_EQ(dense.size(), moments.samples.size());
    for (std::size_t k = 0; k < dense.size(); ++k)
        EXPECT_LT(extract_moments(dense[k].state).max_abs_diff(moments.samples[k].state), 1e-6);
}

TEST(MomentAgreement, DensityLevelAdditivity) {
    const auto p = params(0.3, 1.0, 0.2);
    auto cold = p;
    cold.nbar = 0.0;
    const auto drive = DriveProfile::cd_sin_sq(0.2, 1.0);
    DenseOptions o;
    o.stride = 200;
    const Cutoffs c{12, 12};
    const auto both = dense_evolve(p, drive, c, 0.01, 8.0, o);
    const auto thermal = dense_evolve(p, DriveProfile::off(), c, 0.01, 8.0, o);
    const auto coherent = dense_evolve(cold, drive, c, 0.01, 8.0, o);
    for (std::size_t k = 0; k < both.size(); ++k) {
        const double e = extract_moments(both[k].state).nb;
        const double sum = extract_moments(thermal[k].state).nb + extract_moments(coherent[k].state).nb;
        EXPECT_NEAR(e, sum, 1e-6);
    }
}

TEST(PassiveEnergy, Examples) {
    EXPECT_NEAR(passive_energy(thermal_density(0.0, 6), 1.0), 0.0, 1e-15);
    const Eigen::VectorXcd psi = coherent_ket({1.0, 0.5}, 30);
    EXPECT_NEAR(passive_energy(psi * psi.adjoint(), 2.0), 0.0, 1e-10);
    EXPECT_NEAR(passive_energy(thermal_density(0.3, 60), 1.0), 0.3, 1e-10);
}
