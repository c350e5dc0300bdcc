// oracle.hpp: brute-force density-matrix propagation in a truncated Fock space
//
// Validator for the moment equations: the joint state of charger A and battery B is a dense
// (NA*NB)x(NA*NB) matrix with basis index n_a*NB + n_b. Ladder operators are kept sparse; the
// state itself is dense.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qbattery/cd_control.hpp"
#include "qbattery/dynamics.hpp"
#include "qbattery/errors.hpp"
#include "qbattery/model.hpp"
#include "qbattery/rk4.hpp"

namespace qbattery::oracle {

using SpMat = Eigen::SparseMatrix<cplx>;

struct Cutoffs {
    int na{14};
    int nb{14};
    int dim() const { return na * nb; }
};

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DenseState {
    RowMatrix rho;
    Cutoffs cutoffs;
};

// Truncated single-mode annihilation operator, <n-1|a|n> = sqrt(n).
inline Eigen::MatrixXcd annihilation(int n) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

struct Operators {
    SpMat a, b;
    explicit Operators(Cutoffs c) : a(c.dim(), c.dim()), b(c.dim(), c.dim()) {
        std::vector<Eigen::Triplet<cplx>> ta, tb;
        for (int i = 0; i < c.na; ++i) {
            for (int j = 0; j < c.nb; ++j) {
                const int idx = i * c.nb + j;
                if (i > 0) ta.emplace_back((i - 1) * c.nb + j, idx, std::sqrt(static_cast<double>(i)));
                if (j > 0) tb.emplace_back(i * c.nb + (j - 1), idx, std::sqrt(static_cast<double>(j)));
            }
        }
        a.setFromTriplets(ta.begin(), ta.end());
        b.setFromTriplets(tb.begin(), tb.end());
    }
};

// tr(rho X)
inline cplx expect(const RowMatrix& rho, const SpMat& X) {
    cplx acc{0.0};
    for (int k = 0; k < X.outerSize(); ++k)
        for (SpMat::InnerIterator it(X, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

inline MomentState extract_moments(const DenseState& s) {
    const Operators op(s.cutoffs);
    const SpMat ad = op.a.adjoint();
    const SpMat bd = op.b.adjoint();
    MomentState m;
    m.a_mean = expect(s.rho, op.a);
    m.b_mean = expect(s.rho, op.b);
    m.na = expect(s.rho, SpMat(ad * op.a)).real();
    m.nb = expect(s.rho, SpMat(bd * op.b)).real();
    m.ab_dag = expect(s.rho, SpMat(op.a * bd));
    m.a_sq = expect(s.rho, SpMat(op.a * op.a));
    m.b_sq = expect(s.rho, SpMat(op.b * op.b));
    m.ab = expect(s.rho, SpMat(op.a * op.b));
    return m;
}

// Reduced state of the battery, tr_A rho.
inline Eigen::MatrixXcd reduced_battery(const DenseState& s) {
    const int na = s.cutoffs.na, nb = s.cutoffs.nb;
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(nb, nb);
    for (int i = 0; i < na; ++i) r += s.rho.block(i * nb, i * nb, nb, nb);
    return r;
}

// Energy of the passive state of a single-mode density matrix: eigenvalues sorted decreasingly
// against Fock energies 0, omega0, 2 omega0, ...
inline double passive_energy(const Eigen::MatrixXcd& rho, double omega0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    double e = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) e += omega0 * static_cast<double>(k) * ev[k];
    return e;
}

// Population in the two highest Fock levels of each mode.
inline std::pair<double, double> top_level_population(const DenseState& s) {
    const int na = s.cutoffs.na, nb = s.cutoffs.nb;
    double pa = 0.0, pb = 0.0;
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            const double p = s.rho(i * nb + j, i * nb + j).real();
            if (i >= na - 2) pa += p;
            if (j >= nb - 2) pb += p;
        }
    }
    return {pa, pb};
}

// Empty when trace, Hermiticity and positivity hold within the oracle tolerances.
inline std::string physicality_problem(const DenseState& s) {
    if (std::abs(s.rho.trace() - cplx(1.0)) > 1e-8) return "trace(rho) = 1";
    if ((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) return "rho Hermitian";
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (s.rho + s.rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) return "rho positive semidefinite";
    return {};
}

// ---------------------------------------------------------------------------
// Single-mode reference states, used to build product states for tests.

inline Eigen::VectorXcd coherent_ket(cplx alpha, int n) {
    Eigen::VectorXcd v(n);
    double fact = 1.0;
    cplx pw{1.0};
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            fact *= std::sqrt(static_cast<double>(k));
            pw *= alpha;
        }
        v[k] = std::exp(-0.5 * std::norm(alpha)) * pw / fact;
    }
    return v;
}

inline Eigen::MatrixXcd thermal_density(double nbar, int n) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) r(k, k) = std::pow(nbar, k) / std::pow(nbar + 1.0, k + 1);
    return r;
}

inline DenseState product_state(const Eigen::MatrixXcd& rho_a, const Eigen::MatrixXcd& rho_b) {
    DenseState s;
    s.cutoffs = {static_cast<int>(rho_a.rows()), static_cast<int>(rho_b.rows())};
    const auto na = rho_a.rows(), nb = rho_b.rows();
    s.rho.resize(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) s.rho.block(i * nb, j * nb, nb, nb) = rho_a(i, j) * rho_b;
    return s;
}

inline DenseState vacuum(Cutoffs c) {
    DenseState s;
    s.cutoffs = c;
    s.rho = Eigen::MatrixXcd::Zero(c.dim(), c.dim());
    s.rho(0, 0) = 1.0;
    return s;
}

// ---------------------------------------------------------------------------

struct DenseSample {
    double t{0.0};
    DenseState state;
};

struct DenseOptions {
    int stride{1};
    double leak_threshold{1e-6};
    double trace_tolerance{1e-8};
};

// Right-hand side of the interaction-picture master equation,
// L rho = K + K^dag + gamma (nbar+1) a rho a^dag + gamma nbar a^dag rho a,
// K = (-i H - (gamma/2)[(nbar+1) a^dag a + nbar a a^dag]) rho, for Hermitian rho.
//
// Every ladder operator on the joint basis n_a*NB + n_b is a row shift with a diagonal weight
// (shift NB for a, 1 for b, NB-1 for a b^dag), so each term is one scaled block copy.
class Liouvillian {
public:
    Liouvillian(const ModelParams& p, const DriveProfile& profile, Cutoffs c)
        : params_(p), profile_(profile), c_(c) {
        const int dim = c.dim(), NB = c.nb, NA = c.na;
        const int ma = dim - NB;     // rows touched by a / a^dag
        const int mx = dim - NB + 1; // rows touched by a b^dag / a^dag b
        lower_a_.resize(ma);
        for (int r = 0; r < ma; ++r) lower_a_[r] = std::sqrt(static_cast<double>(r / NB + 1));
        hop_down_.setZero(mx);
        hop_up_.setZero(mx);
        for (int r = 0; r < mx; ++r) {
            // a b^dag: row (i, j) <- row (i+1, j-1)
            const int i = r / NB, j = r % NB;
            if (j >= 1 && i + 1 < NA) hop_down_[r] = std::sqrt(static_cast<double>((i + 1) * j));
            // a^dag b: row (i, j) <- row (i-1, j+1), stored at offset r' = r_target - (NB-1)
            const int rt = r + NB - 1;
            const int it = rt / NB, jt = rt % NB;
            if (it >= 1 && jt + 1 < NB) hop_up_[r] = std::sqrt(static_cast<double>(it * (jt + 1)));
        }
        damping_.resize(dim);
        for (int r = 0; r < dim; ++r) {
            const int i = r / NB;
            const double aad = (i + 1 < NA) ? i + 1.0 : 0.0; // truncated a a^dag
            damping_[r] = -0.5 * p.gamma * ((p.nbar + 1.0) * i + p.nbar * aad);
        }
    }

    RowMatrix operator()(double t, const RowMatrix& rho_in) const { return apply(t, rho_in, coupling_window(t, params_.tau)); }

    RowMatrix apply(double t, const RowMatrix& rho_in, double window) const {
        const cplx I{0.0, 1.0};
        const int dim = c_.dim(), NB = c_.nb;
        const int ma = dim - NB, mx = dim - NB + 1;
        // The K + K^dag form is only valid for Hermitian input; without this the round-off
        // anti-Hermitian part is amplified.
        const RowMatrix rho = 0.5 * (rho_in + rho_in.adjoint());
        const double g = params_.g * window;
        const cplx F = cd::drive_amplitude(t, profile_, params_);

        RowMatrix K = damping_.asDiagonal() * rho;
        // -i F a^dag rho and -i conj(F) a rho
        K.bottomRows(ma).noalias() += (-I * F) * (lower_a_.asDiagonal() * rho.topRows(ma));
        K.topRows(ma).noalias() += (-I * std::conj(F)) * (lower_a_.asDiagonal() * rho.bottomRows(ma));
        if (g != 0.0) {
            K.topRows(mx).noalias() += (-I * g) * (hop_down_.asDiagonal() * rho.bottomRows(mx));
            K.bottomRows(mx).noalias() += (-I * g) * (hop_up_.asDiagonal() * rho.topRows(mx));
        }
        RowMatrix out = K + K.adjoint();
        const double gm = params_.gamma;
        if (gm != 0.0) {
            // a rho a^dag and a^dag rho a
            out.topLeftCorner(ma, ma).noalias() +=
                (gm * (params_.nbar + 1.0)) *
                (lower_a_.asDiagonal() * rho.bottomRightCorner(ma, ma) * lower_a_.asDiagonal());
            if (params_.nbar != 0.0)
                out.bottomRightCorner(ma, ma).noalias() +=
                    (gm * params_.nbar) * (lower_a_.asDiagonal() * rho.topLeftCorner(ma, ma) * lower_a_.asDiagonal());
        }
        return out;
    }

private:
    ModelParams params_;
    DriveProfile profile_;
    Cutoffs c_;
    Eigen::VectorXd lower_a_, hop_down_, hop_up_, damping_;
};

inline std::vector<DenseSample> dense_evolve(const ModelParams& params, const DriveProfile& profile, Cutoffs cutoffs,
                                             double step, double t_end, const DenseOptions& opts = {}) {
    params.validate();
    profile.validate();
    if (cutoffs.na < 4 || cutoffs.nb < 4) throw ConfigError("Fock cutoffs must be >= 4");
    if (!(step > 0.0) || !(t_end >= 0.0)) throw ConfigError("step must be > 0 and t_end >= 0");
    if (opts.stride < 1) throw ConfigError("stride must be >= 1");
    if (profile.kind == DriveKind::CdSinSq) cd::cd_denominator(params.delta_r, params.gamma);

    const Liouvillian L(params, profile, cutoffs);
    const auto nodes = time_grid(step, t_end, params.tau);
    const std::size_t n = nodes.size() - 1;

    std::vector<DenseSample> out;
    DenseState s = vacuum(cutoffs);
    auto keep = [&](double t) {
        const double tr_err = std::abs(s.rho.trace() - cplx(1.0));
        if (tr_err > opts.trace_tolerance)
            throw InvariantViolation("oracle trace drift " + std::to_string(tr_err) + " at t = " + std::to_string(t));
        const auto [pa, pb] = top_level_population(s);
        if (pa > opts.leak_threshold || pb > opts.leak_threshold)
            throw TruncationLeak("top Fock levels hold population (A: " + std::to_string(pa) +
                                 ", B: " + std::to_string(pb) + ") at t = " + std::to_string(t));
        out.push_back({t, s});
    };
    keep(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = nodes[k], h = nodes[k + 1] - t0;
        const double window = coupling_window(t0 + 0.5 * h, params.tau);
        auto rhs = [&](double t, const RowMatrix& r) { return L.apply(t, r, window); };
        s.rho = rk4_step(rhs, t0, s.rho, h);
        if ((k + 1) % static_cast<std::size_t>(opts.stride) == 0 || k + 1 == n) keep(nodes[k + 1]);
    }
    return out;
}

} // namespace qbattery::oracle
