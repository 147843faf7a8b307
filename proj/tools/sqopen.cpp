#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sqopen/scenario.hpp"

namespace {

using sqopen::cli::json;

int finish(const sqopen::cli::ScenarioResult& result, const std::string& out_path, const std::string& csv_path)
{
    if (out_path.empty()) {
        std::cout << result.report.dump(2) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw sqopen::cli::ConfigError("cannot write " + out_path);
        out << result.report.dump(2) << '\n';
    }
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv)
            throw sqopen::cli::ConfigError("cannot write " + csv_path);
        sqopen::cli::write_csv(result.table, csv);
    }
    return result.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sqopen: sums of squares near a tuple"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, csv_path, demo_name;
    int jobs = 1;
    std::int64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario_path, "Scenario JSON")->required();
    run->add_option("--out", out_path, "Report JSON path")->required();
    run->add_option("--csv", csv_path, "CSV table path");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");

    auto* demo = app.add_subcommand("demo", "Run a built-in scenario");
    demo->add_option("name", demo_name, "Demo name (or 'list')")->required();
    demo->add_option("--out", out_path, "Report JSON path (default: stdout)");
    demo->add_option("--csv", csv_path, "CSV table path");
    demo->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sqopen::cli::RunOptions options;
        options.jobs = jobs;
        if (*run) {
            if (*seed_opt)
                options.seed = seed;
            std::ifstream in(scenario_path);
            if (!in)
                throw sqopen::cli::ConfigError("cannot read " + scenario_path);
            json scenario;
            try {
                scenario = json::parse(in);
            } catch (const json::exception& e) {
                throw sqopen::cli::ConfigError(std::string("invalid JSON: ") + e.what());
            }
            return finish(sqopen::cli::run_scenario(std::move(scenario), options), out_path, csv_path);
        }
        const auto& demos = sqopen::cli::demo_scenarios();
        if (demo_name == "list") {
            for (const auto& [name, _] : demos)
                std::cout << name << '\n';
            return 0;
        }
        auto it = demos.find(demo_name);
        if (it == demos.end())
            throw sqopen::cli::ConfigError("unknown demo '" + demo_name + "' (try 'sqopen demo list')");
        return finish(sqopen::cli::run_scenario(it->second, options), out_path, csv_path);
    } catch (const sqopen::cli::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
