#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gbmap/scenario.hpp"

using namespace gbmap;

namespace {

// exit codes: 0 pass, 1 identity failure, 2 hypothesis violation, 3 bad config
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitConfig = 3;

int run_one(ScenarioConfig cfg, const std::string& svg_path, const std::string& json_path,
            std::optional<double> tol, std::optional<int> resolution) {
    if (tol) cfg.tolerance = *tol;
    if (resolution) cfg.resolution = *resolution;
    try {
        Scenario scenario = build_scenario(cfg);
        ScenarioOutcome outcome = run_scenario(scenario);
        std::cout << render_reports(outcome);
        if (!json_path.empty()) {
            std::ofstream f(json_path);
            if (!f) throw Error("cannot write JSON file '" + json_path + "'");
            f << reports_json(outcome);
        }
        if (!svg_path.empty()) write_svg(svg_path, scenario, outcome);
        return outcome.all_pass ? kExitPass : kExitFail;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error in scenario '" << cfg.name << "': " << e.what()
                  << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "scenario '" << cfg.name << "' aborted: " << e.what() << "\n";
        return kExitHypothesis;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical verification of Gauss-Bonnet-type identities for maps "
                 "between surfaces with folds and cusps"};
    app.require_subcommand(1);

    std::string config_path, builtin_name, svg_path, json_path;
    std::optional<double> tol;
    std::optional<int> resolution;

    CLI::App* run = app.add_subcommand("run", "run a scenario from a config file or the "
                                              "built-in registry");
    run->add_option("config", config_path, "path to a scenario config file");
    run->add_option("--builtin", builtin_name, "name of a built-in scenario");
    run->add_option("--svg", svg_path, "write a diagnostic SVG");
    run->add_option("--json", json_path, "write the machine-readable report");
    run->add_option("--tol", tol, "override the identity tolerance");
    run->add_option("--resolution", resolution, "override the trace grid resolution");

    CLI::App* list = app.add_subcommand("list", "list the built-in scenarios");

    int fuzz_count = 100;
    std::uint64_t fuzz_seed = 1;
    CLI::App* fuzz = app.add_subcommand("fuzz", "run randomized trigonometric scenarios");
    fuzz->add_option("--count", fuzz_count, "number of maps");
    fuzz->add_option("--seed", fuzz_seed, "generator seed");
    fuzz->add_option("--tol", tol, "identity tolerance");
    fuzz->add_option("--resolution", resolution, "trace grid resolution");
    fuzz->add_option("--json", json_path, "write a JSON summary");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& s : builtin_scenarios()) {
            std::string ths;
            for (const auto& t : s.theorems) ths += (ths.empty() ? "" : ",") + t;
            std::printf("%-26s (%s)  %s\n", s.name.c_str(), ths.c_str(), s.summary.c_str());
        }
        return kExitPass;
    }

    if (fuzz->parsed()) {
        FuzzOptions opts;
        opts.count = fuzz_count;
        opts.seed = fuzz_seed;
        if (tol) opts.tolerance = *tol;
        if (resolution) opts.resolution = *resolution;
        FuzzResult result = run_fuzz(opts);
        for (const auto& line : result.lines) std::cout << line << "\n";
        std::printf("fuzz summary: %d maps, %d passed, %d rejected (rate %.3f), %d failed\n",
                    result.total, result.passed, result.rejected, result.rejection_rate(),
                    result.failed);
        if (!json_path.empty()) {
            std::ofstream f(json_path);
            f << "{\n  \"total\": " << result.total << ",\n  \"passed\": " << result.passed
              << ",\n  \"rejected\": " << result.rejected
              << ",\n  \"failed\": " << result.failed << "\n}\n";
        }
        return result.failed == 0 ? kExitPass : kExitFail;
    }

    // run
    if (!builtin_name.empty()) {
        const ScenarioConfig* cfg = find_builtin(builtin_name);
        if (!cfg) {
            std::cerr << "unknown built-in scenario '" << builtin_name << "'\n";
            return kExitConfig;
        }
        if (cfg->randomized) {
            FuzzOptions opts;
            opts.count = 10;
            opts.seed = 1;
            if (tol) opts.tolerance = *tol;
            if (resolution) opts.resolution = *resolution;
            FuzzResult result = run_fuzz(opts);
            for (const auto& line : result.lines) std::cout << line << "\n";
            std::printf("fuzz summary: %d maps, %d passed, %d rejected, %d failed\n",
                        result.total, result.passed, result.rejected, result.failed);
            return result.failed == 0 ? kExitPass : kExitFail;
        }
        return run_one(*cfg, svg_path, json_path, tol, resolution);
    }
    if (config_path.empty()) {
        std::cerr << "run needs a config path or --builtin NAME\n";
        return kExitConfig;
    }
    try {
        return run_one(parse_config_file(config_path), svg_path, json_path, tol, resolution);
    } catch (const Error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
}
