#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "misalign/harness.hpp"
#include "misalign/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFailure = 1;

misalign::Scenario load(const std::string& path, const std::optional<std::uint64_t>& seed) {
    misalign::Scenario sc = misalign::load_scenario_file(path);
    if (seed) {
        sc.seed = *seed;
    }
    return sc;
}

void print_errors(const misalign::ScenarioError& e) {
    for (const auto& msg : e.errors()) {
        std::cerr << "error: " << msg << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal misalignment attack simulator for camera/LiDAR fusion pipelines"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Override the scenario seed");

    std::string scenario_path;
    std::string trace_path;
    std::string report_path;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario, write its trace and report");
    run_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--trace", trace_path, "Trace output (JSON lines)")->required();
    run_cmd->add_option("--report", report_path, "Report output (CSV)")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario seed");

    std::int64_t k_max = 5;
    std::string delay = "constant";
    std::string targets = "both";
    std::string out_path;
    unsigned jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a delay grid and write one CSV row per cell");
    sweep_cmd->add_option("--scenario", scenario_path, "Benign base scenario")->required();
    sweep_cmd->add_option("--k-max", k_max, "Largest delay in frames")->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--delay", delay, "Delay distribution")->check(CLI::IsMember({"constant", "uniform"}));
    sweep_cmd->add_option("--targets", targets, "Streams to delay")->check(CLI::IsMember({"camera", "lidar", "both"}));
    sweep_cmd->add_option("--out", out_path, "CSV output")->required();
    sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", seed, "Override the scenario seed");

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
    validate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    validate_cmd->add_option("--seed", seed, "Override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const misalign::Scenario sc = load(scenario_path, seed);

        if (validate_cmd->parsed()) {
            if (auto errors = misalign::validate(sc); !errors.empty()) {
                print_errors(misalign::ScenarioError(std::move(errors)));
                return kExitValidation;
            }
            std::cout << "ok\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            const misalign::RunResult result = misalign::run(sc);
            std::ofstream trace(trace_path, std::ios::binary);
            std::ofstream report(report_path, std::ios::binary);
            if (!trace || !report) {
                std::cerr << "error: cannot open output files\n";
                return kExitFailure;
            }
            misalign::write_trace(trace, result.trace);
            misalign::write_report(report, {misalign::make_report_row(sc, result)});
            return 0;
        }

        if (sweep_cmd->parsed()) {
            misalign::SweepSpec spec;
            spec.k_max = k_max;
            spec.delay = *misalign::parse_delay_kind(delay);
            spec.targets = *misalign::parse_sweep_targets(targets);
            const auto rows = misalign::sweep(sc, spec, jobs);
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot open " << out_path << '\n';
                return kExitFailure;
            }
            misalign::write_report(out, rows);
            return 0;
        }
    } catch (const misalign::ScenarioError& e) {
        print_errors(e);
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
