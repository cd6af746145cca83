#include "gbmap/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace gbmap {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "% .12e", v);
    return buf;
}

const char* class_name(SignClass c) {
    switch (c) {
        case SignClass::Positive: return "positive";
        case SignClass::Negative: return "negative";
        case SignClass::Null: return "null";
    }
    return "?";
}

const char* stratum_name(PointStratum s) {
    return s == PointStratum::InteriorSecondKind ? "interior-second-kind" : "boundary";
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Integral: return "integral";
        case Provenance::Count: return "count";
        case Provenance::Angle: return "angle";
    }
    return "?";
}

} // namespace

ScenarioOutcome run_scenario(const Scenario& scenario) {
    ScenarioOutcome out;
    out.scenario = scenario.name;
    out.data = run_pipeline(scenario);
    out.all_pass = true;
    for (const auto& id : scenario.theorems) {
        TheoremReport rep = run_theorem(id, scenario, out.data);
        out.all_pass = out.all_pass && rep.pass;
        out.reports.push_back(std::move(rep));
    }
    return out;
}

std::string render_reports(const ScenarioOutcome& outcome) {
    std::ostringstream os;
    os << "scenario: " << outcome.scenario << "\n";
    for (const auto& rep : outcome.reports) {
        os << "  [" << rep.id << "] " << (rep.pass ? "PASS" : "FAIL") << "\n";
        for (const auto& t : rep.lhs)
            os << "    lhs  " << fmt(t.value) << "  (err " << fmt(t.error) << ")  " << t.name
               << "\n";
        for (const auto& t : rep.rhs)
            os << "    rhs  " << fmt(t.value) << "  [" << provenance_name(t.provenance)
               << "]  " << t.name << "\n";
        os << "    residual " << fmt(rep.residual) << "  ( " << fmt(rep.residual_over_2pi)
           << " * 2pi, tolerance " << fmt(rep.tolerance) << " )\n";
    }
    if (!outcome.reports.empty()) {
        const TheoremDiagnostics& d = outcome.reports.front().diag;
        os << "  topology: chi(M) = " << d.chi_M << ", chi(cl M+) = " << d.chi_closure_plus
           << ", chi(cl M-) = " << d.chi_closure_minus << ", chi(Sigma) = " << d.chi_sigma
           << ", crossings = " << d.crossings << "\n";
        os << "  counts: S+ = " << d.s_plus << ", S- = " << d.s_minus
           << ", bd+ = " << d.bd_plus << ", bd- = " << d.bd_minus
           << ", bd0 = " << d.bd_null << ", components = " << d.components << "\n";
        for (const auto& p : d.points)
            os << "  point (" << p.location.x << ", " << p.location.y << ") "
               << stratum_name(p.stratum) << " " << class_name(p.sign_class)
               << "  alpha+ = " << p.alpha_plus << " (raw " << p.alpha_plus_raw
               << "), alpha- = " << p.alpha_minus << " (raw " << p.alpha_minus_raw << ")\n";
    }
    return os.str();
}

std::string reports_json(const ScenarioOutcome& outcome) {
    nlohmann::json root;
    root["scenario"] = outcome.scenario;
    root["pass"] = outcome.all_pass;
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& rep : outcome.reports) {
        nlohmann::json r;
        r["id"] = rep.id;
        r["pass"] = rep.pass;
        r["residual"] = rep.residual;
        r["residual_over_2pi"] = rep.residual_over_2pi;
        r["tolerance"] = rep.tolerance;
        nlohmann::json lhs = nlohmann::json::array();
        for (const auto& t : rep.lhs)
            lhs.push_back({{"name", t.name}, {"value", t.value}, {"error", t.error}});
        nlohmann::json rhs = nlohmann::json::array();
        for (const auto& t : rep.rhs)
            rhs.push_back({{"name", t.name},
                           {"value", t.value},
                           {"provenance", provenance_name(t.provenance)}});
        r["lhs"] = lhs;
        r["rhs"] = rhs;

        const TheoremDiagnostics& d = rep.diag;
        nlohmann::json diag;
        diag["chi_M"] = d.chi_M;
        diag["chi_closure_plus"] = d.chi_closure_plus;
        diag["chi_closure_minus"] = d.chi_closure_minus;
        diag["chi_sigma"] = d.chi_sigma;
        diag["crossings"] = d.crossings;
        diag["s_plus"] = d.s_plus;
        diag["s_minus"] = d.s_minus;
        diag["bd_plus"] = d.bd_plus;
        diag["bd_minus"] = d.bd_minus;
        diag["bd_null"] = d.bd_null;
        diag["components"] = d.components;
        diag["closed_components"] = d.closed_components;
        diag["V"] = d.decomposition_V;
        diag["E"] = d.decomposition_E;
        diag["F"] = d.decomposition_F;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : d.points)
            pts.push_back({{"u", p.location.x},
                           {"v", p.location.y},
                           {"stratum", stratum_name(p.stratum)},
                           {"class", class_name(p.sign_class)},
                           {"alpha_plus", p.alpha_plus},
                           {"alpha_minus", p.alpha_minus},
                           {"alpha_plus_raw", p.alpha_plus_raw},
                           {"alpha_minus_raw", p.alpha_minus_raw},
                           {"order", p.admissible_order}});
        diag["points"] = pts;
        diag["notes"] = d.notes;
        r["diagnostics"] = diag;
        reports.push_back(std::move(r));
    }
    root["reports"] = reports;
    return root.dump(2) + "\n";
}

} // namespace gbmap
