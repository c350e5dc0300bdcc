// qbattery: command-line front end: simulate, sweep, compare, selftest

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qbattery/run.hpp"
#include "qbattery/selftest.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRuntimeError = 2, kSelftestFailure = 3 };

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const qbattery::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

} // namespace

int main(int argc, char** argv) {
    namespace run = qbattery::run;
    CLI::App app{"Open quantum battery charging with counterdiabatic drives"};
    app.require_subcommand(1);

    std::string config_path;
    auto* sim = app.add_subcommand("simulate", "integrate one configuration and write CSV/JSON rows");
    sim->add_option("--config", config_path, "JSON configuration")->required();
    auto* swp = app.add_subcommand("sweep", "one run per sweep value plus a manifest");
    swp->add_option("--config", config_path, "JSON configuration")->required();
    auto* cmp = app.add_subcommand("compare", "CD drive against bare envelope and static drive");
    cmp->add_option("--config", config_path, "JSON configuration")->required();
    std::string selftest_json;
    auto* st = app.add_subcommand("selftest", "oracle, decomposition, transitionless and analytic checks");
    st->add_option("--json", selftest_json, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    if (*sim) {
        return guarded([&] {
            run::simulate(run::load_config(config_path));
            return kOk;
        });
    }
    if (*swp) {
        return guarded([&] {
            const auto res = run::sweep(run::load_config(config_path));
            for (const auto& r : res.manifest["runs"])
                if (r["status"] != "ok") std::cerr << "sweep value " << r["value"] << ": " << r["error"] << "\n";
            return res.all_ok ? kOk : kRuntimeError;
        });
    }
    if (*cmp) {
        return guarded([&] {
            const auto cfg = run::load_config(config_path);
            const std::string body = run::compare(cfg).dump(2) + "\n";
            if (cfg.output.path.empty())
                std::cout << body;
            else
                run::write_file(cfg.output.path, body);
            return kOk;
        });
    }
    return guarded([&] {
        const auto rep = qbattery::selftest::run_checks(qbattery::selftest::default_checks());
        const std::string body = rep.body.dump(2) + "\n";
        if (selftest_json.empty())
            std::cout << body;
        else
            run::write_file(selftest_json, body);
        return rep.failed ? kSelftestFailure : kOk;
    });
}
