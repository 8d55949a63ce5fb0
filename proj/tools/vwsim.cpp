#include "vwsim/scenario.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vwsim - deterministic peer-to-peer virtual world content sharing simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a scenario and write raw + summary CSVs");
    std::string scenario = "custom";
    std::string config_path;
    std::string out_dir = ".";
    std::string dynamics;
    std::string strategy;
    int objects = -1;
    long long cycles = -1;
    std::uint64_t seed = 1;
    int reps = 0;
    bool full = false;
    run->add_option("--scenario", scenario, "overhead | delay | load | custom")
        ->check(CLI::IsMember({"overhead", "delay", "load", "custom"}));
    run->add_option("--config", config_path, "JSON config file (defaults when omitted)");
    run->add_option("--objects", objects, "override the object count");
    run->add_option("--cycles", cycles, "override the cycle count");
    run->add_option("--seed", seed, "base seed (repetitions use seed..seed+reps-1)");
    run->add_option("--reps", reps, "repetitions per sweep point (0 = scenario default)");
    run->add_option("--dynamics", dynamics, "on | off")->check(CLI::IsMember({"on", "off"}));
    run->add_option("--strategy", strategy, "improved | basic | distance_sorted");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--full", full, "load scenario at full scale (100,000 cycles)");

    // validate
    auto* validate = app.add_subcommand("validate", "resolve a config file and list violations");
    std::string validate_path;
    validate->add_option("--config", validate_path, "JSON config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            vwsim::ValidationReport report = vwsim::validate_config_file(validate_path);
            std::cout << report.rendered;
            if (report.violations.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& v : report.violations) std::cout << "violation: " << v << "\n";
            return 1;
        }

        vwsim::ScenarioSpec spec;
        spec.kind = vwsim::scenario_from_name(scenario);
        spec.repetitions = reps;
        spec.base_seed = seed;
        spec.full_scale = full;
        if (!config_path.empty()) {
            vwsim::ValidationReport report = vwsim::validate_config_file(config_path);
            if (!report.violations.empty()) {
                for (const auto& v : report.violations) std::cerr << "violation: " << v << "\n";
                return 1;
            }
            spec.base = report.resolved;
        }
        if (objects >= 0) spec.base.objects = objects;
        if (cycles >= 0) spec.base.cycles = static_cast<std::uint64_t>(cycles);
        if (!dynamics.empty()) spec.base.dynamics = dynamics == "on";
        if (!strategy.empty()) spec.base.strategy = vwsim::strategy_from_name(strategy);
        spec.base.seed = seed;

        auto violations = spec.base.validate();
        if (!violations.empty()) {
            for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
            return 1;
        }

        vwsim::ScenarioResult result = vwsim::run_scenario(spec);
        std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        write_file(dir / "raw.csv", result.raw_csv);
        write_file(dir / "summary.csv", result.summary_csv);
        std::cout << (dir / "raw.csv").string() << "\n" << (dir / "summary.csv").string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
