// run.hpp: run configuration, CSV/JSON rendering, and the simulate / sweep / compare drivers
// behind the command-line front end.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbattery/dynamics.hpp"
#include "qbattery/energetics.hpp"
#include "qbattery/errors.hpp"
#include "qbattery/model.hpp"

namespace qbattery::run {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct IoError : Error {
    using Error::Error;
};

struct Numerics {
    double step{0.01};
    double t_end{10.0};
    int sample_stride{10};
};

struct Sweep {
    std::string parameter; // kappa | gamma | F0 | omega_env | g
    std::vector<double> values;
};

enum class Format { Csv, Json };

struct Output {
    std::string path;
    Format format{Format::Csv};
};

struct RunConfig {
    ModelParams model;
    DriveProfile drive;
    Numerics numerics;
    std::optional<Sweep> sweep;
    Output output;
    bool tau_follows_t_end{false}; // tau was not given: coupling stays on for the whole run
    json source;                   // the document as read, echoed into manifests
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline double number(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
    return x;
}

inline double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline const json& section(const json& doc, const char* key, bool required) {
    static const json empty = json::object();
    if (!doc.contains(key)) {
        if (required) throw ConfigError(std::string("missing section '") + key + "'");
        return empty;
    }
    const auto& s = doc.at(key);
    if (!s.is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
    return s;
}

} // namespace detail

inline bool is_sweep_parameter(const std::string& name) {
    return name == "kappa" || name == "gamma" || name == "F0" || name == "omega_env" || name == "g";
}

inline void validate(const RunConfig& c) {
    c.model.validate();
    c.drive.validate();
    if (!(c.numerics.step > 0.0)) throw ConfigError("numerics.step must be > 0");
    if (!(c.numerics.t_end >= 0.0)) throw ConfigError("numerics.t_end must be >= 0");
    if (c.numerics.sample_stride < 1) throw ConfigError("numerics.sample_stride must be >= 1");
    if (c.drive.kind == DriveKind::CdSinSq && c.model.delta_r == 0.0 && c.model.gamma == 0.0)
        throw ConfigError("cd_sin_sq drive needs delta_r != 0 or gamma != 0");
    if (c.sweep) {
        if (!is_sweep_parameter(c.sweep->parameter))
            throw ConfigError("unknown sweep parameter '" + c.sweep->parameter + "'");
        if (c.sweep->values.empty()) throw ConfigError("sweep.values must not be empty");
        for (double v : c.sweep->values)
            if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    }
}

inline RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    detail::reject_unknown(doc, {"model", "drive", "numerics", "sweep", "output"}, "configuration");
    RunConfig c;
    c.source = doc;
    try {
        const auto& m = detail::section(doc, "model", true);
        detail::reject_unknown(m, {"omega0", "g", "gamma", "nbar", "kT", "delta_r", "kappa", "tau"}, "model");
        c.model.omega0 = detail::number_or(m, "omega0", 1.0, "model");
        c.model.g = detail::number(m, "g", "model");
        c.model.gamma = detail::number(m, "gamma", "model");
        if (m.contains("nbar") && m.contains("kT")) throw ConfigError("give either model.nbar or model.kT, not both");
        if (m.contains("kT")) {
            const double kT = detail::number(m, "kT", "model");
            if (kT < 0.0) throw ConfigError("model.kT must be >= 0");
            c.model.nbar = bose_occupation(c.model.omega0, kT);
        } else {
            c.model.nbar = detail::number_or(m, "nbar", 0.0, "model");
        }
        if (m.contains("delta_r") && m.contains("kappa"))
            throw ConfigError("give either model.delta_r or model.kappa, not both");
        if (m.contains("kappa"))
            c.model.delta_r = detuning_from_kappa(detail::number(m, "kappa", "model"), c.model.omega0);
        else
            c.model.delta_r = detail::number_or(m, "delta_r", 0.0, "model");

        const auto& n = detail::section(doc, "numerics", true);
        detail::reject_unknown(n, {"step", "t_end", "sample_stride"}, "numerics");
        c.numerics.t_end = detail::number(n, "t_end", "numerics");
        if (n.contains("sample_stride")) {
            if (!n.at("sample_stride").is_number_integer()) throw ConfigError("numerics.sample_stride must be an integer");
            c.numerics.sample_stride = n.at("sample_stride").get<int>();
        }

        if (m.contains("tau")) {
            c.model.tau = detail::number(m, "tau", "model");
        } else {
            c.tau_follows_t_end = true;
            c.model.tau = std::max(c.numerics.t_end, std::numeric_limits<double>::min());
        }

        const auto& d = detail::section(doc, "drive", true);
        detail::reject_unknown(d, {"profile", "F0", "omega_env"}, "drive");
        if (!d.contains("profile") || !d.at("profile").is_string()) throw ConfigError("drive.profile must be a string");
        c.drive.kind = drive_kind_from_string(d.at("profile").get<std::string>());
        c.drive.F0 = detail::number_or(d, "F0", 0.0, "drive");
        c.drive.omega_env = detail::number_or(d, "omega_env", 0.0, "drive");

        c.numerics.step = n.contains("step") ? detail::number(n, "step", "numerics")
                                             : std::min(0.01, max_stable_step(c.model, c.drive));

        if (doc.contains("sweep")) {
            const auto& s = detail::section(doc, "sweep", true);
            detail::reject_unknown(s, {"parameter", "values"}, "sweep");
            Sweep sw;
            if (!s.contains("parameter") || !s.at("parameter").is_string())
                throw ConfigError("sweep.parameter must be a string");
            sw.parameter = s.at("parameter").get<std::string>();
            if (!s.contains("values") || !s.at("values").is_array()) throw ConfigError("sweep.values must be an array");
            for (const auto& v : s.at("values")) {
                if (!v.is_number()) throw ConfigError("sweep.values must be numbers");
                sw.values.push_back(v.get<double>());
            }
            c.sweep = sw;
        }

        const auto& o = detail::section(doc, "output", false);
        detail::reject_unknown(o, {"path", "format"}, "output");
        if (o.contains("path")) {
            if (!o.at("path").is_string()) throw ConfigError("output.path must be a string");
            c.output.path = o.at("path").get<std::string>();
        }
        if (o.contains("format")) {
            const auto f = o.at("format").get<std::string>();
            if (f == "csv") c.output.format = Format::Csv;
            else if (f == "json") c.output.format = Format::Json;
            else throw ConfigError("output.format must be 'csv' or 'json'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    validate(c);
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

// Copy of the configuration with one sweep parameter replaced.
inline RunConfig with_parameter(RunConfig c, const std::string& name, double value) {
    if (name == "kappa") c.model.delta_r = detuning_from_kappa(value, c.model.omega0);
    else if (name == "gamma") c.model.gamma = value;
    else if (name == "F0") c.drive.F0 = value;
    else if (name == "omega_env") c.drive.omega_env = value;
    else if (name == "g") c.model.g = value;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
    c.sweep.reset();
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------
// Rendering

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "t",          "g_tau",      "a_re",       "a_im",       "b_re",
        "b_im",       "na_re",      "na_im",      "nb_re",      "nb_im",
        "ab_dag_re",  "ab_dag_im",  "a_sq_re",    "a_sq_im",    "b_sq_re",
        "b_sq_im",    "ab_re",      "ab_im",      "e_b_over_omega0", "ergotropy_b_over_omega0",
        "e_a_over_omega0", "m_value"};
    return cols;
}

// 17 significant digits, lowercase scientific.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline std::vector<double> row_values(const TrajectorySample& s, const ModelParams& p) {
    const auto& m = s.state;
    const EnergyReport e = ergotropy_b(m, p.omega0);
    return {s.t,           p.g * s.t,      m.a_mean.real(), m.a_mean.imag(), m.b_mean.real(), m.b_mean.imag(),
            m.na,          0.0,            m.nb,            0.0,             m.ab_dag.real(), m.ab_dag.imag(),
            m.a_sq.real(), m.a_sq.imag(),  m.b_sq.real(),   m.b_sq.imag(),   m.ab.real(),     m.ab.imag(),
            e.e_b / p.omega0, e.ergotropy_b / p.omega0, e.e_a / p.omega0, e.m_value};
}

inline std::string render_csv(const Trajectory& tr) {
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k) out += ',';
        out += cols[k];
    }
    out += '\n';
    for (const auto& s : tr.samples) {
        const auto v = row_values(s, tr.params);
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k) out += ',';
            out += format_double(v[k]);
        }
        out += '\n';
    }
    return out;
}

inline std::string render_json(const Trajectory& tr) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["columns"] = csv_columns();
    json rows = json::array();
    for (const auto& s : tr.samples) rows.push_back(row_values(s, tr.params));
    doc["rows"] = std::move(rows);
    return doc.dump(1) + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Drivers

inline Trajectory trajectory_for(const RunConfig& c) {
    IntegrateOptions opts;
    opts.stride = c.numerics.sample_stride;
    return integrate(c.model, c.drive, c.numerics.step, c.numerics.t_end, opts);
}

inline std::string render(const RunConfig& c) {
    const Trajectory tr = trajectory_for(c);
    return c.output.format == Format::Csv ? render_csv(tr) : render_json(tr);
}

inline void simulate(const RunConfig& c) {
    if (c.output.path.empty()) throw ConfigError("output.path is required");
    write_file(c.output.path, render(c));
}

inline std::filesystem::path sweep_file(const RunConfig& c, std::size_t index) {
    const std::filesystem::path base(c.output.path);
    auto name = base.stem().string() + "_" + c.sweep->parameter + "_" + std::to_string(index) +
                (c.output.format == Format::Csv ? ".csv" : ".json");
    return base.parent_path() / name;
}

inline std::filesystem::path manifest_file(const RunConfig& c) {
    const std::filesystem::path base(c.output.path);
    return base.parent_path() / (base.stem().string() + "_manifest.json");
}

struct SweepResult {
    json manifest;
    bool all_ok{true};
};

// One output file per sweep value, computed concurrently; the manifest is written last.
inline SweepResult sweep(const RunConfig& c) {
    if (!c.sweep) throw ConfigError("sweep block is required");
    if (c.output.path.empty()) throw ConfigError("output.path is required");
    const auto& values = c.sweep->values;

    std::vector<std::future<json>> jobs;
    jobs.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&c, &values, k] {
            json entry{{"value", values[k]}, {"file", sweep_file(c, k).filename().string()}};
            try {
                const RunConfig point = with_parameter(c, c.sweep->parameter, values[k]);
                write_file(sweep_file(c, k), render(point));
                entry["status"] = "ok";
            } catch (const std::exception& e) {
                entry["status"] = "error";
                entry["error"] = e.what();
            }
            return entry;
        }));
    }
    SweepResult res;
    json runs = json::array();
    for (auto& j : jobs) {
        json e = j.get();
        if (e["status"] != "ok") res.all_ok = false;
        runs.push_back(std::move(e));
    }
    res.manifest = {{"schema_version", kSchemaVersion},
                    {"kind", "sweep"},
                    {"parameter", c.sweep->parameter},
                    {"config", c.source},
                    {"runs", std::move(runs)}};
    write_file(manifest_file(c), res.manifest.dump(2) + "\n");
    return res;
}

struct ErgotropyPeak {
    double value{0.0};
    double t{0.0};
};

// Maximum battery ergotropy over every integrator step of the run.
inline ErgotropyPeak max_ergotropy(const RunConfig& c, const DriveProfile& drive) {
    const Trajectory tr = integrate(c.model, drive, c.numerics.step, c.numerics.t_end);
    ErgotropyPeak peak;
    for (const auto& s : tr.samples) {
        const double w = ergotropy_b(s.state, c.model.omega0).ergotropy_b;
        if (w > peak.value) peak = {w, s.t};
    }
    return peak;
}

inline json ratio_or_null(double num, double den) {
    if (den > 0.0) return num / den;
    return nullptr;
}

// CD drive against the same envelope without correction and a static drive of amplitude F0.
inline json compare_point(const RunConfig& c) {
    if (c.drive.kind != DriveKind::CdSinSq) throw ConfigError("compare needs drive.profile = cd_sin_sq");
    const auto cdp = max_ergotropy(c, c.drive);
    const auto bare = max_ergotropy(c, DriveProfile::sin_sq(c.drive.F0, c.drive.omega_env));
    const auto stat = max_ergotropy(c, DriveProfile::constant(c.drive.F0));
    const double w0 = c.model.omega0;
    auto peak = [&](const ErgotropyPeak& p) {
        return json{{"max_ergotropy_over_omega0", p.value / w0}, {"at_t", p.t}, {"at_g_tau", c.model.g * p.t}};
    };
    return {{"cd", peak(cdp)},
            {"bare", peak(bare)},
            {"static", peak(stat)},
            {"ratio_cd_over_static", ratio_or_null(cdp.value, stat.value)},
            {"ratio_cd_over_bare", ratio_or_null(cdp.value, bare.value)}};
}

inline json compare(const RunConfig& c) {
    json report{{"schema_version", kSchemaVersion}, {"kind", "compare"}, {"config", c.source}};
    if (!c.sweep) {
        report["result"] = compare_point(c);
        return report;
    }
    std::vector<std::future<json>> jobs;
    for (double v : c.sweep->values)
        jobs.push_back(std::async(std::launch::async, [&c, v] {
            json r = compare_point(with_parameter(c, c.sweep->parameter, v));
            r["value"] = v;
            return r;
        }));
    json results = json::array();
    for (auto& j : jobs) results.push_back(j.get());
    report["parameter"] = c.sweep->parameter;
    report["results"] = std::move(results);
    return report;
}

} // namespace qbattery::run
