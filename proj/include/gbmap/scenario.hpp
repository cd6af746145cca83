#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gbmap/theorems.hpp"

namespace gbmap {

struct ConfigError : Error {
    using Error::Error;
};

// Raw scenario description as it appears in a config file: everything is a
// string or plain number; build_scenario() parses and validates.
struct ScenarioConfig {
    std::string name;

    std::string map_x, map_y;

    std::string E = "1", F = "0", G = "1";
    std::optional<std::string> K;  // optional curvature cross-check
    std::string validity = "rect";
    double x_min = -10.0, x_max = 10.0, y_min = -10.0, y_max = 10.0;
    double disk_center_x = 0.0, disk_center_y = 0.0, disk_radius = 1.0;
    std::optional<double> period_x;
    std::optional<double> boundary_y0, boundary_y1;  // target circles (degree identity)

    std::string domain_kind = "disk";  // disk | strip
    std::vector<std::pair<std::string, std::string>> loops;  // (u(t), v(t)), outer first
    double domain_period = 1.0;

    std::vector<std::string> theorems;
    double tolerance = 6.283185307179586e-3;
    int resolution = 96;

    std::string summary;  // one-line description for the registry listing
    bool randomized = false;
};

// Parse a TOML-style key/value config file.
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);

// Compile the raw config into a runnable scenario (parses all expressions,
// validates the chart and the domain).
Scenario build_scenario(const ScenarioConfig& config);

// Built-in scenario registry.
const std::vector<ScenarioConfig>& builtin_scenarios();
const ScenarioConfig* find_builtin(const std::string& name);

struct ScenarioOutcome {
    std::string scenario;
    std::vector<TheoremReport> reports;
    bool all_pass = false;
    PipelineData data;  // kept for rendering
};

// Full pipeline plus every requested theorem.
ScenarioOutcome run_scenario(const Scenario& scenario);

// Human-readable report table.
std::string render_reports(const ScenarioOutcome& outcome);

// Machine-readable document with every term, error estimate, count and
// classification.
std::string reports_json(const ScenarioOutcome& outcome);

// Diagnostic picture: domain, M+/M- shading, singular curves, classified
// points with their angles, boundary orientation arrows.
void write_svg(const std::string& path, const Scenario& scenario,
               const ScenarioOutcome& outcome);

struct FuzzOptions {
    int count = 100;
    std::uint64_t seed = 1;
    double tolerance = 6.283185307179586e-2;  // 1e-2 * 2pi
    int resolution = 96;
};

struct FuzzResult {
    int total = 0;
    int passed = 0;
    int rejected = 0;
    int failed = 0;
    std::vector<std::string> lines;  // one per map, deterministic

    double rejection_rate() const {
        return total ? static_cast<double>(rejected) / total : 0.0;
    }
};

// Randomized trigonometric maps on the unit disk, checked against the
// signed identity. Maps whose hypotheses fail (degenerate points, missed
// transversality, estimator rejections) are rejected and logged, not
// counted as failures. Deterministic for a fixed seed.
FuzzResult run_fuzz(const FuzzOptions& options);

// Scenario for one fuzz index (exposed so single cases can be reproduced).
ScenarioConfig fuzz_config(std::uint64_t seed, int index);

} // namespace gbmap
