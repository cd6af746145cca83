#include "gbmap/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gbmap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double record_r0(const PlanarDomain& dom, const std::vector<SingularPointRecord>& records,
                 std::size_t idx) {
    const SingularPointRecord& rec = records[idx];
    double r0 = 0.1;
    for (std::size_t j = 0; j < records.size(); ++j) {
        if (j == idx) continue;
        double d = domain_distance(dom, rec.location, records[j].location);
        r0 = std::min(r0, 0.45 * d);
    }
    if (rec.stratum == PointStratum::InteriorSecondKind)
        r0 = std::min(r0, 0.45 * dom.distance_to_boundary(rec.location));
    if (r0 < 1e-4)
        throw EstimatorError("distinguished points too close together for the "
                             "sector-angle estimator");
    return r0;
}

// polyline slices of a component between its interior second-kind points
std::vector<std::vector<Vec2>> component_slices(const SingularComponent& comp,
                                                const std::vector<SingularPointRecord>& records,
                                                int comp_index) {
    std::vector<std::pair<double, Vec2>> breaks;
    for (const auto& rec : records)
        if (rec.stratum == PointStratum::InteriorSecondKind && rec.component == comp_index)
            breaks.push_back({rec.arc_s, rec.location});
    std::sort(breaks.begin(), breaks.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const auto& smp = comp.samples;
    std::vector<std::vector<Vec2>> out;
    auto slice = [&](double s0, double s1, Vec2 p0, Vec2 p1) {
        std::vector<Vec2> pts;
        pts.push_back(p0);
        for (const auto& s : smp)
            if (s.s > s0 + 1e-12 && s.s < s1 - 1e-12) pts.push_back(s.p);
        pts.push_back(p1);
        if (pts.size() >= 2) out.push_back(std::move(pts));
    };

    if (breaks.empty()) {
        std::vector<Vec2> pts;
        for (const auto& s : smp) pts.push_back(s.p);
        out.push_back(std::move(pts));
        return out;
    }
    if (!comp.closed) {
        double prev_s = smp.front().s;
        Vec2 prev_p = smp.front().p;
        for (const auto& [bs, bp] : breaks) {
            slice(prev_s, bs, prev_p, bp);
            prev_s = bs;
            prev_p = bp;
        }
        slice(prev_s, smp.back().s, prev_p, smp.back().p);
    } else {
        double total = smp.back().s;
        for (std::size_t k = 0; k < breaks.size(); ++k) {
            auto [s0, p0] = breaks[k];
            auto [s1, p1] = breaks[(k + 1) % breaks.size()];
            if (k + 1 < breaks.size()) {
                slice(s0, s1, p0, p1);
            } else {
                // wrap through the loop seam
                std::vector<Vec2> pts;
                pts.push_back(p0);
                for (const auto& s : smp)
                    if (s.s > s0 + 1e-12 && s.s < total - 1e-12) pts.push_back(s.p);
                for (const auto& s : smp)
                    if (s.s < s1 - 1e-12) pts.push_back(s.p);
                pts.push_back(p1);
                if (pts.size() >= 2) out.push_back(std::move(pts));
            }
        }
    }
    return out;
}

TheoremDiagnostics make_diagnostics(const PipelineData& data) {
    TheoremDiagnostics d;
    const RegionDecomposition& dec = data.decomposition;
    d.chi_M = dec.chi_M;
    d.chi_closure_plus = dec.chi_closure_plus;
    d.chi_closure_minus = dec.chi_closure_minus;
    d.chi_sigma = dec.chi_sigma;
    d.crossings = dec.crossings;
    d.s_plus = dec.s_plus;
    d.s_minus = dec.s_minus;
    d.bd_plus = dec.bd_plus;
    d.bd_minus = dec.bd_minus;
    d.bd_null = dec.bd_null;
    d.components = static_cast<int>(data.trace.components.size());
    for (const auto& c : data.trace.components)
        if (c.closed) ++d.closed_components;
    d.decomposition_V = dec.V;
    d.decomposition_E = dec.E;
    d.decomposition_F = dec.F;
    for (const auto& rec : data.records) {
        PointSummary p;
        p.location = rec.location;
        p.stratum = rec.stratum;
        p.sign_class = rec.sign_class;
        p.alpha_plus = rec.alpha_plus.value;
        p.alpha_minus = rec.alpha_minus.value;
        p.alpha_plus_raw = rec.alpha_plus.extrapolated;
        p.alpha_minus_raw = rec.alpha_minus.extrapolated;
        p.admissible_order = rec.admissible_order;
        d.points.push_back(p);
    }
    d.notes = data.warnings;
    return d;
}

void finalize(TheoremReport& rep, double tolerance) {
    rep.tolerance = tolerance;
    rep.residual = std::abs(rep.lhs_total() - rep.rhs_total());
    rep.residual_over_2pi = rep.residual / kTwoPi;
    rep.pass = rep.residual <= tolerance;
}

} // namespace

QuadResult kappa_s_integral(const SurfaceMap& map,
                            const std::vector<SingularComponent>& components,
                            const std::vector<SingularPointRecord>& records,
                            double abs_tol) {
    QuadResult total;
    std::vector<std::vector<Vec2>> slices;
    for (std::size_t ci = 0; ci < components.size(); ++ci) {
        auto s = component_slices(components[ci], records, static_cast<int>(ci));
        slices.insert(slices.end(), s.begin(), s.end());
    }
    if (slices.empty()) return total;
    double share = abs_tol / static_cast<double>(slices.size());
    for (const auto& pts : slices) {
        QuadResult r = integrate_on_sigma(
            map, pts, [&](Vec2 q) { return singular_curvature_density(map, q); }, share);
        total.value += r.value;
        total.error += r.error;
        total.evals += r.evals;
        total.budget_exceeded |= r.budget_exceeded;
    }
    return total;
}

PipelineData run_pipeline(const Scenario& scenario) {
    PipelineData data;
    TraceOptions opts;
    opts.resolution = scenario.resolution;
    data.trace = trace_singular_set(scenario.map, scenario.domain, opts);
    data.warnings = data.trace.warnings;

    data.crossings_per_loop.assign(scenario.domain.loops().size(), {});
    for (std::size_t ci = 0; ci < data.trace.components.size(); ++ci) {
        SingularComponent& comp = data.trace.components[ci];
        auto recs = classify_kind(scenario.map, comp, static_cast<int>(ci));
        for (auto& r : recs) data.records.push_back(std::move(r));
        for (const auto& cr : {comp.start_crossing, comp.end_crossing}) {
            if (!cr) continue;
            SingularPointRecord rec;
            rec.location = cr->p;
            rec.stratum = PointStratum::Boundary;
            rec.component = static_cast<int>(ci);
            rec.crossing = cr;
            data.records.push_back(std::move(rec));
            data.crossings_per_loop[static_cast<std::size_t>(cr->loop)].push_back(cr->loop_t);
        }
        data.sigma.push_back(comp.to_polyline());
    }

    for (std::size_t i = 0; i < data.records.size(); ++i)
        classify_sign(scenario.map, scenario.domain, data.records[i],
                      record_r0(scenario.domain, data.records, i));

    TransversalityReport tv =
        transversality_check(scenario.map, scenario.domain, data.trace.components);
    if (!tv.ok) {
        std::string msg = "transversality check failed:";
        for (const auto& v : tv.violations) msg += "\n  " + v;
        throw TransversalityError(msg);
    }

    data.decomposition =
        build_decomposition(scenario.map, scenario.domain, data.trace.components,
                            data.records, std::max(128, 2 * scenario.resolution));
    return data;
}

// ---------------------------------------------------------------------------
// Gauss-Bonnet, area form: the curvature integral against dA plus twice the
// singular-curvature integral plus the boundary term balances 2 pi chi(M)
// plus the angle defects of the null boundary points.

TheoremReport gb1(const Scenario& scenario, const PipelineData& data) {
    TheoremReport rep;
    rep.id = "GB1";
    double qtol = scenario.tolerance / 10.0;

    QuadResult area = integrate_region(scenario.map, scenario.domain, RegionMode::Absolute,
                                       qtol, data.sigma);
    rep.lhs.push_back({"int_M (K o f) dA", area.value, area.error});

    QuadResult ks = kappa_s_integral(scenario.map, data.trace.components, data.records, qtol);
    rep.lhs.push_back({"2 int_Sigma kappa_s ds", 2.0 * ks.value, 2.0 * ks.error});

    QuadResult bd = boundary_geodesic_term(scenario.map, scenario.domain,
                                           BoundaryCombination::Formula1,
                                           data.crossings_per_loop, qtol);
    rep.lhs.push_back({"int_dM kappa_g ds", bd.value, bd.error});

    rep.rhs.push_back({"2 pi chi(M)", kTwoPi * data.decomposition.chi_M, Provenance::Count});
    double angle_sum = 0.0;
    for (const auto& rec : data.records)
        if (rec.stratum == PointStratum::Boundary && rec.sign_class == SignClass::Null)
            angle_sum += 2.0 * rec.alpha_plus.value - kPi;
    rep.rhs.push_back({"sum over null boundary points of (2 alpha+ - pi)", angle_sum,
                       Provenance::Angle});

    rep.diag = make_diagnostics(data);
    finalize(rep, scenario.tolerance);
    return rep;
}

// ---------------------------------------------------------------------------
// Gauss-Bonnet, signed area form.

TheoremReport gb2(const Scenario& scenario, const PipelineData& data) {
    TheoremReport rep;
    rep.id = "GB2";
    double qtol = scenario.tolerance / 10.0;

    QuadResult area = integrate_region(scenario.map, scenario.domain, RegionMode::Signed,
                                       qtol, data.sigma);
    rep.lhs.push_back({"int_M (K o f) dA_signed", area.value, area.error});

    QuadResult bp = boundary_geodesic_term(scenario.map, scenario.domain,
                                           BoundaryCombination::Formula2Plus,
                                           data.crossings_per_loop, qtol);
    rep.lhs.push_back({"int_{dM in M+} kappa_g ds", bp.value, bp.error});

    QuadResult bm = boundary_geodesic_term(scenario.map, scenario.domain,
                                           BoundaryCombination::Formula2Minus,
                                           data.crossings_per_loop, qtol);
    rep.lhs.push_back({"- int_{dM in M-} kappa_g ds", -bm.value, bm.error});

    const RegionDecomposition& dec = data.decomposition;
    rep.rhs.push_back({"2 pi (chi(M+) - chi(M-))",
                       kTwoPi * (dec.chi_plus() - dec.chi_minus()), Provenance::Count});
    rep.rhs.push_back({"2 pi (#S+ - #S-)", kTwoPi * (dec.s_plus - dec.s_minus),
                       Provenance::Count});
    rep.rhs.push_back({"pi (#bd+ - #bd-)", kPi * (dec.bd_plus - dec.bd_minus),
                       Provenance::Count});

    rep.diag = make_diagnostics(data);
    finalize(rep, scenario.tolerance);
    return rep;
}

// ---------------------------------------------------------------------------
// Rotation-index identity for planar maps: chi(M)/2 equals the sum of the
// singular-loop indices plus half the boundary indices, each index computed
// both by curvature integral and by tangent winding.

TheoremReport levine(const Scenario& scenario, const PipelineData& data) {
    TheoremReport rep;
    rep.id = "LEVINE";

    if (!scenario.map.target().is_flat())
        throw HypothesisError("rotation-index identity requires a flat target");
    TransversalityReport tv = transversality_check(
        scenario.map, scenario.domain, data.trace.components, /*require_empty=*/true);
    if (!tv.ok) {
        std::string msg = "precondition failed (singular set must avoid the boundary):";
        for (const auto& v : tv.violations) msg += "\n  " + v;
        throw TransversalityError(msg);
    }
    for (const auto& rec : data.records)
        if (rec.stratum == PointStratum::InteriorSecondKind)
            throw HypothesisError("rotation-index identity requires first-kind-only "
                                  "singular loops");

    double qtol = scenario.tolerance / 10.0;
    rep.diag = make_diagnostics(data);

    // singular loop indices: curvature route vs winding route
    long icurves = 0;
    for (std::size_t ci = 0; ci < data.trace.components.size(); ++ci) {
        const SingularComponent& comp = data.trace.components[ci];
        QuadResult r = kappa_s_integral(scenario.map, {comp}, {}, qtol);
        double raw = r.value / kTwoPi;
        long n = std::lround(raw);
        if (std::abs(raw - static_cast<double>(n)) > 0.05)
            throw HypothesisError("singular-curvature index is not an integer: " +
                                  std::to_string(raw));
        std::vector<Vec2> tangents;
        for (std::size_t k = 0; k + 1 < comp.samples.size(); ++k)
            tangents.push_back(scenario.map.df_sing_tangent(comp.samples[k].p));
        int w = rotation_index(tangents);
        if (std::labs(n) != std::labs(static_cast<long>(w)))
            throw HypothesisError("rotation-index oracles disagree on a singular loop: " +
                                  std::to_string(n) + " vs " + std::to_string(w));
        rep.diag.notes.push_back("singular loop " + std::to_string(ci) +
                                 ": curvature index " + std::to_string(n) +
                                 " (raw " + std::to_string(raw) + "), winding " +
                                 std::to_string(w));
        icurves += n;
    }

    // boundary indices
    long iboundary = 0;
    const MetricChart& target = scenario.map.target();
    for (std::size_t li = 0; li < scenario.domain.loops().size(); ++li) {
        const BoundaryLoop& loop = scenario.domain.loops()[li];
        BoundaryImageJet jet(scenario.map, loop);
        double lam = scenario.map.lambda(loop.point(1.234));
        double sgn = lam > 0.0 ? 1.0 : -1.0;
        auto f = [&](double t) { return sgn * jet.curvature_density(target, t); };
        QuadResult r = integrate_curve(f, 0.0, kTwoPi, {}, qtol);
        double raw = r.value / kTwoPi;
        long n = std::lround(raw);
        if (std::abs(raw - static_cast<double>(n)) > 0.05)
            throw HypothesisError("boundary curvature index is not an integer: " +
                                  std::to_string(raw));
        std::vector<Vec2> tangents;
        for (int k = 0; k < 512; ++k) tangents.push_back(jet.velocity(kTwoPi * k / 512.0));
        int w = rotation_index(tangents);
        if (n != static_cast<long>(sgn) * w)
            throw HypothesisError("rotation-index oracles disagree on boundary loop " +
                                  std::to_string(li));
        rep.diag.notes.push_back("boundary loop " + std::to_string(li) +
                                 ": curvature index " + std::to_string(n) +
                                 " (raw " + std::to_string(raw) + "), winding " +
                                 std::to_string(w) + ", sgn lambda " +
                                 std::to_string(static_cast<int>(sgn)));
        iboundary += n;
    }

    rep.lhs.push_back({"chi(M)/2", 0.5 * data.decomposition.chi_M, 0.0});
    rep.rhs.push_back({"sum I(c_i)", static_cast<double>(icurves), Provenance::Count});
    rep.rhs.push_back({"(1/2) sum I(e_i)", 0.5 * static_cast<double>(iboundary),
                       Provenance::Count});

    // exact half-integer identity
    long lhs2 = data.decomposition.chi_M;
    long rhs2 = 2 * icurves + iboundary;
    rep.residual = std::abs(static_cast<double>(lhs2 - rhs2)) / 2.0;
    rep.residual_over_2pi = rep.residual / kTwoPi;
    rep.tolerance = 0.0;
    rep.pass = lhs2 == rhs2;
    return rep;
}

// ---------------------------------------------------------------------------
// Degree identity: deg(f) chi(N) against the Euler/count combination.

TheoremReport qfi(const Scenario& scenario, const PipelineData& data) {
    TheoremReport rep;
    rep.id = "QFI";
    if (!scenario.target_domain)
        throw HypothesisError("degree identity needs a target domain (boundary_y)");
    const TargetDomain& target = *scenario.target_domain;

    DegreeResult deg = mapping_degree(scenario.map, scenario.domain, data.trace.components,
                                      target);
    rep.diag = make_diagnostics(data);
    rep.diag.notes.push_back(
        "degree " + std::to_string(deg.degree) + " from " +
        std::to_string(deg.preimages1.size()) + " preimages at value 1 and " +
        std::to_string(deg.preimages2.size()) + " at value 2");

    auto ratio = degree_from_curvature_ratio(scenario.map, scenario.domain, data.sigma,
                                             target);
    if (ratio) {
        if (std::abs(*ratio - deg.degree) > 0.05)
            throw HypothesisError("curvature-ratio degree cross-check failed: " +
                                  std::to_string(*ratio) + " vs " +
                                  std::to_string(deg.degree));
        rep.diag.notes.push_back("curvature-integral ratio " + std::to_string(*ratio));
    }

    const RegionDecomposition& dec = data.decomposition;
    rep.lhs.push_back({"deg(f) chi(N)", static_cast<double>(deg.degree * target.chi), 0.0});
    rep.rhs.push_back({"chi(M)", static_cast<double>(dec.chi_M), Provenance::Count});
    rep.rhs.push_back({"-2 chi(cl M-)", static_cast<double>(-2 * dec.chi_closure_minus),
                       Provenance::Count});
    rep.rhs.push_back({"#S+ - #S-", static_cast<double>(dec.s_plus - dec.s_minus),
                       Provenance::Count});
    rep.rhs.push_back({"#bd+", static_cast<double>(dec.bd_plus), Provenance::Count});
    rep.rhs.push_back({"#bd_null / 2", 0.5 * dec.bd_null, Provenance::Count});

    // exact half-integer comparison
    long lhs2 = 2 * deg.degree * target.chi;
    long rhs2 = 2 * dec.chi_M - 4 * dec.chi_closure_minus + 2 * (dec.s_plus - dec.s_minus) +
                2 * dec.bd_plus + dec.bd_null;
    bool main_ok = lhs2 == rhs2;

    // intermediate forms with open and closed Euler characteristics
    long lhs44 = 2 * deg.degree * target.chi;
    long rhs44 = 2 * (dec.chi_plus() - dec.chi_minus()) + 2 * (dec.s_plus - dec.s_minus) +
                 (dec.bd_plus - dec.bd_minus);
    long rhs45 = 2 * (dec.chi_closure_plus - dec.chi_closure_minus) +
                 2 * (dec.s_plus - dec.s_minus) + (dec.bd_plus - dec.bd_minus);
    bool open_ok = lhs44 == rhs44;
    bool closed_ok = lhs44 == rhs45;
    bool euler_ok = dec.closure_euler_relation_holds();
    rep.diag.notes.push_back(std::string("open-chi form ") + (open_ok ? "holds" : "FAILS"));
    rep.diag.notes.push_back(std::string("closed-chi form ") +
                             (closed_ok ? "holds" : "FAILS"));
    rep.diag.notes.push_back(std::string("closure Euler relation ") +
                             (euler_ok ? "holds" : "FAILS"));

    rep.residual = std::abs(static_cast<double>(lhs2 - rhs2)) / 2.0;
    rep.residual_over_2pi = rep.residual / kTwoPi;
    rep.tolerance = 0.0;
    rep.pass = main_ok && open_ok && closed_ok && euler_ok;
    return rep;
}

TheoremReport run_theorem(const std::string& id, const Scenario& scenario,
                          const PipelineData& data) {
    if (id == "gb1") return gb1(scenario, data);
    if (id == "gb2") return gb2(scenario, data);
    if (id == "levine") return levine(scenario, data);
    if (id == "qfi") return qfi(scenario, data);
    throw Error("unknown theorem id '" + id + "'");
}

} // namespace gbmap
