#pragma once

#include <string>
#include <vector>

#include "gbmap/quad.hpp"
#include "gbmap/singular.hpp"
#include "gbmap/topo.hpp"

namespace gbmap {

struct TermValue {
    std::string name;
    double value = 0.0;
    double error = 0.0;
};

enum class Provenance { Integral, Count, Angle };

struct RhsTerm {
    std::string name;
    double value = 0.0;
    Provenance provenance = Provenance::Count;
};

struct PointSummary {
    Vec2 location;
    PointStratum stratum = PointStratum::InteriorSecondKind;
    SignClass sign_class = SignClass::Null;
    double alpha_plus = 0.0, alpha_minus = 0.0;   // final (snapped) values
    double alpha_plus_raw = 0.0, alpha_minus_raw = 0.0;
    int admissible_order = 0;
};

struct TheoremDiagnostics {
    int chi_M = 0, chi_closure_plus = 0, chi_closure_minus = 0, chi_sigma = 0;
    int crossings = 0;
    int s_plus = 0, s_minus = 0, bd_plus = 0, bd_minus = 0, bd_null = 0;
    int components = 0, closed_components = 0;
    int decomposition_V = 0, decomposition_E = 0, decomposition_F = 0;
    std::vector<PointSummary> points;
    std::vector<std::string> notes;
};

struct TheoremReport {
    std::string id;  // GB1 / GB2 / LEVINE / QFI
    std::vector<TermValue> lhs;
    std::vector<RhsTerm> rhs;
    double residual = 0.0;
    double residual_over_2pi = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    TheoremDiagnostics diag;

    double lhs_total() const {
        double s = 0.0;
        for (const auto& t : lhs) s += t.value;
        return s;
    }
    double rhs_total() const {
        double s = 0.0;
        for (const auto& t : rhs) s += t.value;
        return s;
    }
};

struct Scenario {
    std::string name;
    SurfaceMap map;
    PlanarDomain domain;
    std::optional<TargetDomain> target_domain;  // QFI scenarios
    std::vector<std::string> theorems;          // lowercase ids: gb1 gb2 levine qfi
    double tolerance = 6.283185307179586e-3;    // 1e-3 * 2pi
    int resolution = 96;
};

// Everything the theorem assemblies share: traced singular set, classified
// distinguished points, boundary crossing parameters, decomposition.
struct PipelineData {
    TraceResult trace;
    std::vector<SingularPointRecord> records;
    std::vector<Polyline> sigma;
    std::vector<std::vector<double>> crossings_per_loop;
    RegionDecomposition decomposition;
    std::vector<std::string> warnings;
};

PipelineData run_pipeline(const Scenario& scenario);

TheoremReport gb1(const Scenario& scenario, const PipelineData& data);
TheoremReport gb2(const Scenario& scenario, const PipelineData& data);
TheoremReport levine(const Scenario& scenario, const PipelineData& data);
TheoremReport qfi(const Scenario& scenario, const PipelineData& data);

// Dispatch by id ("gb1", "gb2", "levine", "qfi").
TheoremReport run_theorem(const std::string& id, const Scenario& scenario,
                          const PipelineData& data);

// Total singular-curvature integral (sum over components, not doubled),
// split at second-kind points.
QuadResult kappa_s_integral(const SurfaceMap& map,
                            const std::vector<SingularComponent>& components,
                            const std::vector<SingularPointRecord>& records,
                            double abs_tol);

} // namespace gbmap
