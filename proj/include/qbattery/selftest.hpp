// selftest.hpp: named consistency checks run by `qbattery selftest`

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbattery/analytic.hpp"
#include "qbattery/cd_control.hpp"
#include "qbattery/dynamics.hpp"
#include "qbattery/energetics.hpp"
#include "qbattery/oracle.hpp"

namespace qbattery::selftest {

using nlohmann::json;

enum class Status { Pass, Warn, Fail };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Warn: return "warn";
    case Status::Fail: return "fail";
    }
    return "fail";
}

struct Outcome {
    Status status{Status::Pass};
    json detail = json::object();
};

struct Check {
    std::string name;
    std::function<Outcome()> run;
};

struct OraclePoint {
    ModelParams params;
    DriveProfile drive;
};

using MomentIntegrator =
    std::function<Trajectory(const ModelParams&, const DriveProfile&, double step, double t_end, int stride)>;

inline Trajectory default_integrator(const ModelParams& p, const DriveProfile& d, double step, double t_end, int stride) {
    return integrate(p, d, step, t_end, {stride, true});
}

// Name and size of the largest field difference between two moment states.
inline std::pair<std::string, double> worst_field(const MomentState& x, const MomentState& y) {
    const std::pair<const char*, double> diffs[] = {
        {"a_mean", std::abs(x.a_mean - y.a_mean)}, {"b_mean", std::abs(x.b_mean - y.b_mean)},
        {"na", std::abs(x.na - y.na)},             {"nb", std::abs(x.nb - y.nb)},
        {"ab_dag", std::abs(x.ab_dag - y.ab_dag)}, {"a_sq", std::abs(x.a_sq - y.a_sq)},
        {"b_sq", std::abs(x.b_sq - y.b_sq)},       {"ab", std::abs(x.ab - y.ab)}};
    std::pair<std::string, double> worst{"", -1.0};
    for (const auto& [n, v] : diffs)
        if (v > worst.second) worst = {n, v};
    return worst;
}

inline std::vector<OraclePoint> selftest_oracle_points() {
    std::vector<OraclePoint> pts;
    ModelParams p;
    p.g = 0.3;
    p.gamma = 1.0;
    p.nbar = 0.1;
    p.delta_r = 0.5;
    p.tau = 6.0;
    pts.push_back({p, DriveProfile::cd_sin_sq(0.3, 0.7)});
    p.g = 0.2;
    p.gamma = 0.05;
    p.nbar = 0.0;
    p.delta_r = 0.0;
    pts.push_back({p, DriveProfile::constant(0.2)});
    return pts;
}

inline Check oracle_equivalence_check(std::vector<OraclePoint> points, MomentIntegrator integrator = default_integrator,
                                      double t_end = 6.0, oracle::Cutoffs cutoffs = {12, 12}) {
    return {"oracle_equivalence", [points = std::move(points), integrator, t_end, cutoffs] {
                Outcome o;
                json per_point = json::array();
                for (const auto& pt : points) {
                    const double step = 0.01;
                    const int stride = 50;
                    const auto dense = oracle::dense_evolve(pt.params, pt.drive, cutoffs, step, t_end, {stride});
                    const auto tr = integrator(pt.params, pt.drive, step, t_end, stride);
                    std::pair<std::string, double> worst{"", 0.0};
                    for (std::size_t k = 0; k < dense.size() && k < tr.samples.size(); ++k) {
                        const auto w = worst_field(tr.samples[k].state, oracle::extract_moments(dense[k].state));
                        if (w.second > worst.second) worst = w;
                    }
                    per_point.push_back({{"worst_field", worst.first}, {"max_abs_diff", worst.second}});
                    if (!(worst.second <= 1e-6)) {
                        o.status = Status::Fail;
                        o.detail["failed_invariant"] = "moment field '" + worst.first + "' matches dense oracle";
                    }
                }
                o.detail["points"] = per_point;
                return o;
            }};
}

inline Check decomposition_check() {
    return {"decomposition", [] {
                Outcome o;
                ModelParams p;
                p.g = 0.2;
                p.gamma = 1.0;
                p.nbar = 0.5;
                p.tau = 20.0;
                try {
                    const auto d = decompose(p, DriveProfile::cd_sin_sq(0.3, 1.0), 0.01, 20.0);
                    o.detail = {{"additivity_residual", d.additivity_residual},
                                {"ergotropy_residual", d.ergotropy_residual},
                                {"coherent_energy_residual", d.coherent_energy_residual},
                                {"thermal_ergotropy_max", d.thermal_ergotropy_max}};
                    if (d.coherent_energy_residual > 1e-6) {
                        o.status = Status::Fail;
                        o.detail["failed_invariant"] = "ergotropy equals coherent-only energy";
                    }
                    if (d.thermal_ergotropy_max > 1e-9) {
                        o.status = Status::Fail;
                        o.detail["failed_invariant"] = "thermal-only ergotropy vanishes";
                    }
                } catch (const DecompositionMismatch& e) {
                    o.status = Status::Fail;
                    o.detail = {{"failed_invariant", e.what()}, {"max_residual", e.max_residual}};
                }
                return o;
            }};
}

inline Check transitionless_check() {
    return {"transitionless_two_level", [] {
                Outcome o;
                const auto rep = cd::transitionless_demo(cd::TwoLevelSweep{});
                o.detail = {{"final_fidelity_bare", rep.final_fidelity_bare},
                            {"min_fidelity_cd", rep.min_fidelity_cd}};
                if (rep.min_fidelity_cd < 1.0 - 1e-4) {
                    o.status = Status::Fail;
                    o.detail["failed_invariant"] = "CD-driven state follows the instantaneous eigenstate";
                }
                if (rep.final_fidelity_bare >= 0.9) {
                    o.status = Status::Fail;
                    o.detail["failed_invariant"] = "bare sweep is non-adiabatic";
                }
                return o;
            }};
}

inline json validation_to_json(const analytic::ValidationReport& rep) {
    json cands = json::array();
    for (const auto& c : rep.candidates) {
        json e{{"B", analytic::to_string(c.interpretation)},
               {"beta_form", analytic::to_string(c.beta_form)},
               {"evaluated", c.evaluated}};
        if (c.evaluated) {
            e["alpha_residual"] = c.alpha_residual;
            e["beta_residual"] = c.beta_residual;
        } else {
            e["note"] = c.note;
        }
        cands.push_back(std::move(e));
    }
    const auto& best = rep.best_candidate();
    return {{"status", rep.status == analytic::ValidationStatus::Verified ? "VERIFIED" : "UNVERIFIED"},
            {"max_alpha", rep.max_alpha},
            {"threshold", rep.threshold},
            {"best", {{"B", analytic::to_string(best.interpretation)},
                      {"beta_form", analytic::to_string(best.beta_form)},
                      {"residual", best.residual()}}},
            {"candidates", std::move(cands)}};
}

inline Check analytic_check() {
    return {"analytic_cross_check", [] {
                Outcome o;
                json runs = json::array();
                bool verified = true;
                for (double gamma : {1.0, 0.05}) {
                    ModelParams p;
                    p.g = 0.2;
                    p.gamma = gamma;
                    p.delta_r = 0.0;
                    p.tau = 50.0;
                    const auto rep = analytic::validate_against_numerics(p, DriveProfile::cd_sin_sq(0.01, 1.0), {0.01, 50.0});
                    json j = validation_to_json(rep);
                    j["gamma"] = gamma;
                    verified = verified && rep.status == analytic::ValidationStatus::Verified;
                    runs.push_back(std::move(j));
                }
                o.detail["runs"] = std::move(runs);
                if (!verified) o.status = Status::Warn;
                return o;
            }};
}

inline std::vector<Check> default_checks() {
    return {oracle_equivalence_check(selftest_oracle_points()), decomposition_check(), transitionless_check(),
            analytic_check()};
}

struct Report {
    json body;
    bool failed{false};
};

// Runs every check; exceptions count as failures of the check that raised them.
inline Report run_checks(const std::vector<Check>& checks) {
    Report rep;
    json results = json::array();
    bool warned = false;
    for (const auto& c : checks) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.status = Status::Fail;
            o.detail = {{"error", e.what()}};
        }
        if (o.status == Status::Fail) rep.failed = true;
        if (o.status == Status::Warn) warned = true;
        results.push_back({{"name", c.name}, {"status", to_string(o.status)}, {"detail", std::move(o.detail)}});
    }
    rep.body = {{"schema_version", 1},
                {"status", rep.failed ? "fail" : (warned ? "warn" : "pass")},
                {"checks", std::move(results)}};
    return rep;
}

} // namespace qbattery::selftest
