#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gbmap/topo.hpp"

using namespace gbmap;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kUV = {"u", "v"};
const std::vector<std::string> kT = {"t"};

Expr uv(const std::string& s) { return parse_expression(s, kUV); }
Expr in_t(const std::string& s) { return parse_expression(s, kT); }

MetricChart big_flat() { return MetricChart::flat(ChartRegion::rectangle(-90, 90, -90, 90)); }

PlanarDomain unit_disk() {
    return PlanarDomain::disk({BoundaryLoop(in_t("cos(t)"), in_t("sin(t)"))});
}

MetricChart flat_cylinder(double ymin, double ymax) {
    return MetricChart::flat(ChartRegion::rectangle(0, 1, ymin, ymax), 1.0);
}

PlanarDomain unit_strip() {
    return PlanarDomain::strip(BoundaryLoop(in_t("t/(2*pi)"), in_t("0")),
                               BoundaryLoop(in_t("1 - t/(2*pi)"), in_t("1")), 1.0);
}

// classified pipeline helper for decomposition tests
RegionDecomposition decompose(const SurfaceMap& map, const PlanarDomain& dom) {
    TraceResult tr = trace_singular_set(map, dom);
    std::vector<SingularPointRecord> records;
    for (std::size_t ci = 0; ci < tr.components.size(); ++ci) {
        auto recs = classify_kind(map, tr.components[ci], static_cast<int>(ci));
        for (auto& r : recs) {
            classify_sign(map, dom, r, 0.08);
            records.push_back(r);
        }
        for (const auto& cr :
             {tr.components[ci].start_crossing, tr.components[ci].end_crossing}) {
            if (!cr) continue;
            SingularPointRecord rec;
            rec.location = cr->p;
            rec.stratum = PointStratum::Boundary;
            rec.crossing = cr;
            rec.component = static_cast<int>(ci);
            classify_sign(map, dom, rec, 0.08);
            records.push_back(rec);
        }
    }
    return build_decomposition(map, dom, tr.components, records);
}

} // namespace

TEST_CASE("decomposition: identity disk") {
    SurfaceMap ident(uv("u"), uv("v"), big_flat());
    RegionDecomposition dec = decompose(ident, unit_disk());
    CHECK(dec.V == 0);
    CHECK(dec.E == 0);
    CHECK(dec.F == 1);
    CHECK(dec.chi_M == 1);
    CHECK(dec.chi_closure_plus == 1);
    CHECK(dec.chi_closure_minus == 0);
    CHECK(dec.chi_sigma == 0);
    CHECK(dec.chi_plus() == 1);
    CHECK(dec.closure_euler_relation_holds());
}

TEST_CASE("decomposition: fold disk") {
    SurfaceMap fold(uv("u"), uv("v^2"), big_flat());
    RegionDecomposition dec = decompose(fold, unit_disk());
    CHECK(dec.V == 2);
    CHECK(dec.E == 3);  // one singular chord + two boundary arcs
    CHECK(dec.F == 2);
    CHECK(dec.V - dec.E + dec.F == dec.chi_M);
    CHECK(dec.crossings == 2);
    CHECK(dec.chi_closure_plus == 1);
    CHECK(dec.chi_closure_minus == 1);
    CHECK(dec.chi_sigma == 1);
    CHECK(dec.bd_null == 2);
    CHECK(dec.s_plus == 0);
    // closure relation: 1 = 1 - 1 + 2/2
    CHECK(dec.closure_euler_relation_holds());
}

TEST_CASE("decomposition: cusp disk") {
    SurfaceMap cusp(uv("u^3 - 3*u*v"), uv("v"), big_flat());
    RegionDecomposition dec = decompose(cusp, unit_disk());
    CHECK(dec.V == 3);  // two crossings + the cusp
    CHECK(dec.E == 4);  // two singular arcs + two boundary arcs
    CHECK(dec.F == 2);
    CHECK(dec.V - dec.E + dec.F == 1);
    CHECK(dec.chi_sigma == 1);
    CHECK(dec.chi_closure_plus == 1);
    CHECK(dec.chi_closure_minus == 1);
    CHECK(dec.s_plus == 1);
    CHECK(dec.s_minus == 0);
    CHECK(dec.bd_plus + dec.bd_minus == 2);  // non-null boundary points
    CHECK(dec.closure_euler_relation_holds());
}

TEST_CASE("decomposition: annulus with a concentric fold circle") {
    std::string g = "(0.5 + (sqrt(u^2 + v^2) - 1.5)^2)/sqrt(u^2 + v^2)";
    SurfaceMap af(uv(g + " * u"), uv(g + " * v"), big_flat());
    PlanarDomain ann = PlanarDomain::disk({BoundaryLoop(in_t("2*cos(t)"), in_t("2*sin(t)")),
                                           BoundaryLoop(in_t("cos(t)"), in_t("-sin(t)"))});
    RegionDecomposition dec = decompose(af, ann);
    CHECK(dec.V == 0);
    CHECK(dec.F == 2);          // two annular faces
    CHECK(dec.cut_edges == 2);  // one virtual cut per annulus
    CHECK(dec.V - dec.E + dec.F == 0);
    CHECK(dec.chi_closure_plus == 0);
    CHECK(dec.chi_closure_minus == 0);
    CHECK(dec.chi_sigma == 0);
    CHECK(dec.closure_euler_relation_holds());
}

TEST_CASE("decomposition: four fold circles on the cylinder") {
    MetricChart cyl = flat_cylinder(-0.5, 1.5);
    SurfaceMap f(uv("u"), uv("v + (1.5/(4*pi))*sin(4*pi*v)"), std::move(cyl));
    RegionDecomposition dec = decompose(f, unit_strip());
    CHECK(dec.F == 5);  // five alternating annular bands
    CHECK(dec.V == 0);
    CHECK(dec.V - dec.E + dec.F == 0);
    int plus = 0, minus = 0;
    for (const auto& face : dec.faces) (face.sign > 0 ? plus : minus)++;
    CHECK(plus == 3);
    CHECK(minus == 2);
    CHECK(dec.chi_closure_plus == 0);
    CHECK(dec.chi_closure_minus == 0);
    CHECK(dec.closure_euler_relation_holds());
}

TEST_CASE("rotation index") {
    auto circle_tangents = [](int n, bool ccw) {
        std::vector<Vec2> t;
        for (int i = 0; i < n; ++i) {
            double a = 2 * kPi * i / n;
            t.push_back(ccw ? Vec2{-std::sin(a), std::cos(a)}
                            : Vec2{-std::sin(-a), std::cos(-a)});
        }
        return t;
    };
    CHECK(rotation_index(circle_tangents(256, true)) == 1);
    CHECK(rotation_index(circle_tangents(256, false)) == -1);

    // limacon (1 + 2 cos t)(cos t, sin t): rotation index 2
    std::vector<Vec2> lima;
    int n = 2048;
    for (int i = 0; i < n; ++i) {
        double t = 2 * kPi * i / n;
        double r = 1 + 2 * std::cos(t), dr = -2 * std::sin(t);
        lima.push_back({dr * std::cos(t) - r * std::sin(t),
                        dr * std::sin(t) + r * std::cos(t)});
    }
    CHECK(rotation_index(lima) == 2);

    // reversal negates the index
    std::vector<Vec2> rev(lima.rbegin(), lima.rend());
    for (auto& v : rev) v = -v;
    CHECK(rotation_index(rev) == -2);

    std::vector<Vec2> bad = {{1, 0}, {0, 0}, {0, 1}};
    CHECK_THROWS_AS(rotation_index(bad), TopologyError);
}

TEST_CASE("mapping degree: identity and double cover of the cylinder") {
    TargetDomain band{0.0, 1.0, 0};

    SurfaceMap ident(uv("u"), uv("v"), flat_cylinder(-0.5, 1.5));
    DegreeResult d1 = mapping_degree(ident, unit_strip(), {}, band);
    CHECK(d1.degree == 1);
    CHECK(d1.preimages1.size() == 1);

    SurfaceMap dbl(uv("2*u"), uv("v"), flat_cylinder(-0.5, 1.5));
    DegreeResult d2 = mapping_degree(dbl, unit_strip(), {}, band);
    CHECK(d2.degree == 2);
    CHECK(d2.preimages1.size() == 2);
}

TEST_CASE("mapping degree: folded cylinder map of degree one") {
    MetricChart cyl = flat_cylinder(-0.5, 1.5);
    SurfaceMap f(uv("u"), uv("v + 0.5*sin(2*pi*v)"), std::move(cyl));
    PlanarDomain strip = unit_strip();
    TraceResult tr = trace_singular_set(f, strip);
    CHECK(tr.components.size() == 2);  // two fold circles
    for (const auto& c : tr.components) CHECK(c.closed);

    TargetDomain band{0.0, 1.0, 0};
    DegreeResult d = mapping_degree(f, strip, tr.components, band);
    CHECK(d.degree == 1);
    CHECK((d.preimages1.size() == 1 || d.preimages1.size() == 3));

    // hypothesis violation: the image of the boundary is not in dN
    SurfaceMap off(uv("u"), uv("v + 0.1"), flat_cylinder(-0.5, 1.5));
    CHECK_THROWS_AS(mapping_degree(off, strip, {}, band), HypothesisError);
}

TEST_CASE("mapping degree cross-check by the curvature ratio") {
    // curved cylinder metric E = G = exp(0.6 y^2): total curvature over the
    // band is -0.6 (nonzero), so the ratio check applies
    Expr conf = parse_expression("exp(0.6*y^2)", {"x", "y"});
    MetricChart curved(conf, Expr::constant(0.0), conf,
                       ChartRegion::rectangle(0, 1, -0.5, 1.5), std::nullopt, 1.0);
    SurfaceMap f(uv("u"), uv("v + 0.5*sin(2*pi*v)"), std::move(curved));
    PlanarDomain strip = unit_strip();
    TraceResult tr = trace_singular_set(f, strip);

    std::vector<Polyline> sigma;
    for (const auto& c : tr.components) sigma.push_back(c.to_polyline());

    TargetDomain band{0.0, 1.0, 0};
    DegreeResult d = mapping_degree(f, strip, tr.components, band);
    auto ratio = degree_from_curvature_ratio(f, strip, sigma, band);
    REQUIRE(ratio.has_value());
    CHECK(std::abs(*ratio - d.degree) < 0.05);
}
