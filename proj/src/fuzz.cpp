#include <cinttypes>
#include <cstdio>
#include <random>

#include "gbmap/scenario.hpp"

namespace gbmap {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

ScenarioConfig fuzz_config(std::uint64_t seed, int index) {
    // one generator per map so every index is reproducible on its own
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(index));
    rng.discard(7);
    std::uniform_real_distribution<double> coef(-0.35, 0.35);
    double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);

    ScenarioConfig cfg;
    cfg.name = "fuzz-trig-" + std::to_string(index);
    cfg.map_x = "u + " + num(a) + "*sin(2*pi*v) + " + num(b) + "*cos(2*pi*u)";
    cfg.map_y = "v + " + num(c) + "*sin(2*pi*u) + " + num(d) + "*cos(2*pi*v)";
    cfg.loops = {{"cos(t)", "sin(t)"}};
    cfg.theorems = {"gb2"};
    cfg.tolerance = 6.283185307179586e-2;
    cfg.resolution = 96;
    return cfg;
}

FuzzResult run_fuzz(const FuzzOptions& options) {
    FuzzResult out;
    out.total = options.count;
    for (int i = 0; i < options.count; ++i) {
        ScenarioConfig cfg = fuzz_config(options.seed, i);
        cfg.tolerance = options.tolerance;
        cfg.resolution = options.resolution;
        std::string line = cfg.name + ": ";
        try {
            Scenario scenario = build_scenario(cfg);
            ScenarioOutcome outcome = run_scenario(scenario);
            const TheoremReport& rep = outcome.reports.front();
            if (rep.pass) {
                ++out.passed;
                line += "pass  residual/2pi = " + std::to_string(rep.residual_over_2pi) +
                        "  (S+ " + std::to_string(rep.diag.s_plus) + ", S- " +
                        std::to_string(rep.diag.s_minus) + ", bd+ " +
                        std::to_string(rep.diag.bd_plus) + ", bd- " +
                        std::to_string(rep.diag.bd_minus) + ", bd0 " +
                        std::to_string(rep.diag.bd_null) + ")";
            } else {
                ++out.failed;
                line += "FAIL  residual/2pi = " + std::to_string(rep.residual_over_2pi);
            }
        } catch (const DegeneracyError& e) {
            ++out.rejected;
            line += std::string("rejected (degenerate): ") + e.what();
        } catch (const TransversalityError& e) {
            ++out.rejected;
            line += std::string("rejected (transversality): ") + e.what();
        } catch (const AdmissibilityError& e) {
            ++out.rejected;
            line += std::string("rejected (non-admissible): ") + e.what();
        } catch (const EstimatorError& e) {
            ++out.rejected;
            line += std::string("rejected (estimator): ") + e.what();
        } catch (const TraceError& e) {
            ++out.rejected;
            line += std::string("rejected (trace): ") + e.what();
        } catch (const TopologyError& e) {
            ++out.rejected;
            line += std::string("rejected (topology): ") + e.what();
        }
        out.lines.push_back(line);
    }
    return out;
}

} // namespace gbmap
