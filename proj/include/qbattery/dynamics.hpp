// dynamics.hpp: Gaussian moment equations of the interaction-picture master equation
//
// The drive enters as H_drive = F a^dagger + conj(F) a with F the (possibly complex) CD amplitude;
// for a real envelope this is F (a^dagger + a). The equations for <a^2>, <b^2> and <ab> follow from
// d<X>/dt = i<[H, X]> + gamma (nbar+1) <D^dag[a] X> + gamma nbar <D^dag[a^dagger] X>.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qbattery/cd_control.hpp"
#include "qbattery/errors.hpp"
#include "qbattery/model.hpp"
#include "qbattery/rk4.hpp"

namespace qbattery {

struct MomentState {
    cplx a_mean{0.0}; // <a>
    cplx b_mean{0.0}; // <b>
    double na{0.0};   // <a^dagger a>
    double nb{0.0};   // <b^dagger b>
    cplx ab_dag{0.0}; // <a b^dagger>
    cplx a_sq{0.0};   // <a^2>
    cplx b_sq{0.0};   // <b^2>
    cplx ab{0.0};     // <a b>

    friend MomentState operator+(const MomentState& x, const MomentState& y) {
        return {x.a_mean + y.a_mean, x.b_mean + y.b_mean, x.na + y.na,     x.nb + y.nb,
                x.ab_dag + y.ab_dag, x.a_sq + y.a_sq,     x.b_sq + y.b_sq, x.ab + y.ab};
    }
    friend MomentState operator-(const MomentState& x, const MomentState& y) { return x + (-1.0) * y; }
    friend MomentState operator*(double c, const MomentState& x) {
        return {c * x.a_mean, c * x.b_mean, c * x.na, c * x.nb, c * x.ab_dag, c * x.a_sq, c * x.b_sq, c * x.ab};
    }

    // Largest absolute difference over all eight fields.
    double max_abs_diff(const MomentState& o) const {
        return std::max({std::abs(a_mean - o.a_mean), std::abs(b_mean - o.b_mean), std::abs(na - o.na),
                         std::abs(nb - o.nb), std::abs(ab_dag - o.ab_dag), std::abs(a_sq - o.a_sq),
                         std::abs(b_sq - o.b_sq), std::abs(ab - o.ab)});
    }

    // Name of the first broken physicality condition, or empty when the state is admissible.
    // The tolerance is absolute for states holding at most one quantum in total and scales with the
    // total occupation above that (squared for the quadratic Cauchy-Schwarz bound).
    std::string violated_invariant(double abs_tol) const {
        const double scale = std::max(1.0, std::abs(na) + std::abs(nb));
        const double tol = abs_tol * scale;
        if (!(na >= -tol)) return "na >= 0";
        if (!(nb >= -tol)) return "nb >= 0";
        if (!(na >= std::norm(a_mean) - tol)) return "na >= |<a>|^2";
        if (!(nb >= std::norm(b_mean) - tol)) return "nb >= |<b>|^2";
        if (!(std::norm(ab_dag) <= na * (nb + 1.0) + tol * scale)) return "|<ab^dag>|^2 <= na (nb + 1)";
        return {};
    }
};

inline constexpr double kPhysicalityTolerance = 1e-9;

struct TrajectorySample {
    double t{0.0};
    MomentState state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    ModelParams params;
    DriveProfile profile;
    double step{0.0};
};

// Moment derivatives with the coupling window value supplied by the caller (the integrators hold it
// fixed over a step so the switch-off at tau never falls inside a Runge-Kutta stage).
inline MomentState moment_rhs(double t, const MomentState& s, const ModelParams& p, const DriveProfile& profile,
                              double window) {
    const cplx I{0.0, 1.0};
    const double g = p.g * window;
    const double gm = p.gamma;
    const cplx F = cd::drive_amplitude(t, profile, p);

    MomentState d;
    d.a_mean = -I * (g * s.b_mean + F) - 0.5 * gm * s.a_mean;
    d.b_mean = -I * g * s.a_mean;
    d.ab_dag = I * (g * (s.na - s.nb) - F * std::conj(s.b_mean)) - 0.5 * gm * s.ab_dag;
    d.nb = 2.0 * g * s.ab_dag.imag();
    d.na = -2.0 * (g * s.ab_dag + std::conj(F) * s.a_mean).imag() - gm * s.na + gm * p.nbar;
    d.a_sq = -2.0 * I * (g * s.ab + F * s.a_mean) - gm * s.a_sq;
    d.b_sq = -2.0 * I * g * s.ab;
    d.ab = -I * (g * (s.a_sq + s.b_sq) + F * s.b_mean) - 0.5 * gm * s.ab;
    return d;
}

inline MomentState moment_rhs(double t, const MomentState& s, const ModelParams& p, const DriveProfile& profile) {
    return moment_rhs(t, s, p, profile, coupling_window(t, p.tau));
}

// Time nodes from 0 to t_end with spacing <= step; tau is a node whenever 0 < tau < t_end.
inline std::vector<double> time_grid(double step, double t_end, double tau) {
    std::vector<double> nodes{0.0};
    auto segment = [&](double a, double b) {
        const long n = static_cast<long>(std::ceil((b - a) / step - 1e-9));
        const double h = (b - a) / static_cast<double>(n);
        for (long k = 1; k < n; ++k) nodes.push_back(a + k * h);
        nodes.push_back(b);
    };
    if (t_end <= 0.0) return nodes;
    if (tau > 0.0 && tau < t_end) {
        segment(0.0, tau);
        segment(tau, t_end);
    } else {
        segment(0.0, t_end);
    }
    return nodes;
}

// Largest admissible step: 0.05 / max(omega_env, g, gamma, omega0).
inline double max_stable_step(const ModelParams& p, const DriveProfile& profile) {
    const double env = profile.has_envelope() ? profile.omega_env : 0.0;
    return 0.05 / std::max({env, p.g, p.gamma, p.omega0});
}

struct IntegrateOptions {
    int stride{1};          // keep every stride-th step (the final step is always kept)
    bool check_invariants{true};
};

inline Trajectory integrate_from(const MomentState& initial, const ModelParams& params, const DriveProfile& profile,
                                 double step, double t_end, const IntegrateOptions& opts = {}) {
    params.validate();
    profile.validate();
    if (!(step > 0.0)) throw StepTooLarge("step must be > 0");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
    if (opts.stride < 1) throw ConfigError("stride must be >= 1");
    const double hmax = max_stable_step(params, profile);
    if (step > hmax * (1.0 + 1e-12))
        throw StepTooLarge("step " + std::to_string(step) + " exceeds limit " + std::to_string(hmax));
    if (profile.kind == DriveKind::CdSinSq) cd::cd_denominator(params.delta_r, params.gamma);

    const auto nodes = time_grid(step, t_end, params.tau);
    const std::size_t n = nodes.size() - 1;

    Trajectory tr;
    tr.params = params;
    tr.profile = profile;
    tr.step = step;
    tr.samples.reserve(n / static_cast<std::size_t>(opts.stride) + 2);

    auto keep = [&](double t, const MomentState& s) {
        if (opts.check_invariants) {
            const auto bad = s.violated_invariant(kPhysicalityTolerance);
            if (!bad.empty())
                throw InvariantViolation("moment invariant '" + bad + "' broken at t = " + std::to_string(t));
        }
        tr.samples.push_back({t, s});
    };

    MomentState y = initial;
    keep(0.0, y);
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = nodes[k], h = nodes[k + 1] - t0;
        const double window = coupling_window(t0 + 0.5 * h, params.tau);
        auto rhs = [&](double t, const MomentState& s) { return moment_rhs(t, s, params, profile, window); };
        y = rk4_step(rhs, t0, y, h);
        if ((k + 1) % static_cast<std::size_t>(opts.stride) == 0 || k + 1 == n) keep(nodes[k + 1], y);
    }
    return tr;
}

// Trajectory from the joint vacuum.
inline Trajectory integrate(const ModelParams& params, const DriveProfile& profile, double step, double t_end,
                            const IntegrateOptions& opts = {}) {
    return integrate_from(MomentState{}, params, profile, step, t_end, opts);
}

} // namespace qbattery
