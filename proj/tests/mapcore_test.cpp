#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gbmap/mapcore.hpp"

using namespace gbmap;

namespace {

const std::vector<std::string> kUV = {"u", "v"};
const std::vector<std::string> kT = {"t"};

Expr uv(const std::string& s) { return parse_expression(s, kUV); }
Expr in_t(const std::string& s) { return parse_expression(s, kT); }

MetricChart big_flat() { return MetricChart::flat(ChartRegion::rectangle(-50, 50, -50, 50)); }

SurfaceMap fold_map() { return SurfaceMap(uv("u"), uv("v^2"), big_flat()); }
SurfaceMap cusp_map() { return SurfaceMap(uv("u^3 - 3*u*v"), uv("v"), big_flat()); }

MetricChart sphere_chart() {
    Expr conf = parse_expression("4/(1 + x^2 + y^2)^2", {"x", "y"});
    return MetricChart(conf, Expr::constant(0.0), conf,
                       ChartRegion::rectangle(-3, 3, -3, 3), Expr::constant(1.0));
}

PlanarDomain unit_disk() {
    return PlanarDomain::disk({BoundaryLoop(in_t("cos(t)"), in_t("sin(t)"))});
}

} // namespace

TEST_CASE("jacobian of the reference maps") {
    SurfaceMap fold = fold_map();
    Mat2 J = fold.jacobian({0.5, 0.2});
    CHECK(J.a == doctest::Approx(1.0));
    CHECK(J.b == doctest::Approx(0.0));
    CHECK(J.c == doctest::Approx(0.0));
    CHECK(J.d == doctest::Approx(0.4));

    SurfaceMap cusp = cusp_map();
    Mat2 Jc = cusp.jacobian({0.0, 0.0});
    CHECK(Jc.a == doctest::Approx(0.0));
    CHECK(Jc.b == doctest::Approx(0.0));
    CHECK(Jc.c == doctest::Approx(0.0));
    CHECK(Jc.d == doctest::Approx(1.0));

    SurfaceMap ident(uv("u"), uv("v"), big_flat());
    Mat2 Ji = ident.jacobian({-1.7, 2.9});
    CHECK(Ji.a == doctest::Approx(1.0));
    CHECK(Ji.d == doctest::Approx(1.0));
    CHECK(Ji.b == doctest::Approx(0.0));
    CHECK(Ji.c == doctest::Approx(0.0));
}

TEST_CASE("signed area density of the reference maps") {
    SurfaceMap fold = fold_map();
    CHECK(fold.lambda({0.3, 0.7}) == doctest::Approx(1.4));  // 2v

    SurfaceMap cusp = cusp_map();
    CHECK(cusp.lambda({0.5, 0.1}) == doctest::Approx(3 * (0.25 - 0.1)));  // 3(u^2 - v)

    SurfaceMap ident(uv("u"), uv("v"), sphere_chart());
    CHECK(ident.lambda({0.0, 0.0}) == doctest::Approx(4.0));

    SurfaceMap far(uv("u + 100"), uv("v"), sphere_chart());
    CHECK_THROWS_AS(far.lambda({0.0, 0.0}), ChartExitError);
}

TEST_CASE("dlambda flags degenerate singular points") {
    SurfaceMap fold = fold_map();
    Vec2 g = fold.dlambda({0.42, -0.3});
    CHECK(g.x == doctest::Approx(0.0));
    CHECK(g.y == doctest::Approx(2.0));

    SurfaceMap cusp = cusp_map();
    Vec2 gc = cusp.dlambda({0.2, 0.6});
    CHECK(gc.x == doctest::Approx(6 * 0.2));
    CHECK(gc.y == doctest::Approx(-3.0));

    // (u^2 - v^2, 2uv): lambda = 4(u^2 + v^2), dlambda(0,0) = 0
    SurfaceMap sq(uv("u^2 - v^2"), uv("2*u*v"), big_flat());
    CHECK(sq.lambda({0.5, 0.25}) == doctest::Approx(4 * (0.25 + 0.0625)));
    Vec2 gz = sq.dlambda({0.0, 0.0});
    CHECK(gz.norm() == doctest::Approx(0.0));
}

TEST_CASE("null directions") {
    SurfaceMap fold = fold_map();
    Vec2 eta = fold.null_direction({0.3, 0.0});
    CHECK(std::abs(eta.y) == doctest::Approx(1.0));
    CHECK(eta.x == doctest::Approx(0.0));

    SurfaceMap cusp = cusp_map();
    double t = 0.2;
    Vec2 etac = cusp.null_direction({t, t * t});
    CHECK(std::abs(etac.x) == doctest::Approx(1.0));
    CHECK(etac.y == doctest::Approx(0.0).epsilon(1e-9));

    SurfaceMap degen(uv("u^2"), uv("v^2"), big_flat());
    CHECK_THROWS_AS(degen.null_direction({0.0, 0.0}), RankError);
    CHECK_THROWS_AS(fold.null_direction({0.3, 0.5}), RankError);

    // |Df eta| <= 1e-8 ||Df|| at accepted points
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        Vec2 p{d(rng), 0.0};
        Mat2 J = fold.jacobian(p);
        Vec2 e = fold.null_direction(p);
        CHECK((J * e).norm() <= 1e-8 * (J.singular_values()[0] + 1.0));
    }

    // orientation form: {gamma', eta} positively oriented
    Vec2 oriented = fold.null_direction({0.3, 0.0}, {1.0, 0.0});
    CHECK(oriented.y == doctest::Approx(1.0));
    Vec2 flipped = fold.null_direction({0.3, 0.0}, {-1.0, 0.0});
    CHECK(flipped.y == doctest::Approx(-1.0));
}

TEST_CASE("pullback metric and the det = lambda^2 identity") {
    SurfaceMap ident(uv("u"), uv("v"), big_flat());
    Mat2 g = ident.pullback_metric({0.4, 0.6});
    CHECK(g.a == doctest::Approx(1.0));
    CHECK(g.d == doctest::Approx(1.0));
    CHECK(g.b == doctest::Approx(0.0));

    SurfaceMap fold = fold_map();
    Mat2 gf = fold.pullback_metric({0.7, -0.4});
    CHECK(gf.a == doctest::Approx(1.0));
    CHECK(gf.b == doctest::Approx(0.0));
    CHECK(gf.d == doctest::Approx(4 * 0.16));

    // det ds^2 = lambda^2 at random points, also on a curved target
    SurfaceMap curved(uv("0.3*u + 0.1*sin(v)"), uv("0.4*v - 0.2*u^2"), sphere_chart());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.2, 1.2);
    for (int i = 0; i < 100; ++i) {
        Vec2 p{d(rng), d(rng)};
        for (const SurfaceMap* m : {&fold, &curved}) {
            double l = m->lambda(p);
            CHECK(m->pullback_metric(p).det() == doctest::Approx(l * l).epsilon(1e-10));
        }
    }
}

TEST_CASE("lambda matches area_density(f(p)) * det Df(p)") {
    SurfaceMap curved(uv("0.5*u"), uv("0.5*v + 0.1*u^2"), sphere_chart());
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        Vec2 p{d(rng), d(rng)};
        double direct = curved.target().area_density(curved(p)) * curved.jacobian(p).det();
        CHECK(curved.lambda(p) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("disk domains: membership, chi, orientation checks") {
    PlanarDomain disk = unit_disk();
    CHECK(disk.chi() == 1);
    CHECK(disk.contains({0.0, 0.0}));
    CHECK(disk.contains({0.7, 0.5}));
    CHECK(!disk.contains({1.2, 0.0}));

    // annulus 1 <= r <= 2: outer ccw, inner cw
    PlanarDomain annulus = PlanarDomain::disk(
        {BoundaryLoop(in_t("2*cos(t)"), in_t("2*sin(t)")),
         BoundaryLoop(in_t("cos(t)"), in_t("-sin(t)"))});
    CHECK(annulus.chi() == 0);
    CHECK(annulus.contains({1.5, 0.0}));
    CHECK(!annulus.contains({0.2, 0.2}));
    CHECK(!annulus.contains({2.5, 0.0}));

    // wrong orientations are rejected
    CHECK_THROWS_AS(PlanarDomain::disk({BoundaryLoop(in_t("cos(t)"), in_t("-sin(t)"))}),
                    DomainError);
    CHECK_THROWS_AS(PlanarDomain::disk({BoundaryLoop(in_t("2*cos(t)"), in_t("2*sin(t)")),
                                        BoundaryLoop(in_t("cos(t)"), in_t("sin(t)"))}),
                    DomainError);
    // hole outside the outer loop
    CHECK_THROWS_AS(PlanarDomain::disk({BoundaryLoop(in_t("cos(t)"), in_t("sin(t)")),
                                        BoundaryLoop(in_t("5 + cos(t)"), in_t("-sin(t)"))}),
                    DomainError);
}

TEST_CASE("strip domains: membership, wrapping, chi") {
    double P = 1.0;
    PlanarDomain strip = PlanarDomain::strip(
        BoundaryLoop(in_t("t/(2*pi)"), in_t("0")),
        BoundaryLoop(in_t("1 - t/(2*pi)"), in_t("1")), P);
    CHECK(strip.chi() == 0);
    CHECK(strip.contains({0.25, 0.5}));
    CHECK(strip.contains({7.25, 0.5}));  // wraps in u
    CHECK(!strip.contains({0.25, 1.5}));

    Vec2 d = strip.wrapped_diff({0.95, 0.0}, {0.05, 0.0});
    CHECK(d.x == doctest::Approx(-0.1));

    // wavy lower boundary
    PlanarDomain wavy = PlanarDomain::strip(
        BoundaryLoop(in_t("t/(2*pi)"), in_t("0.1*sin(t)")),
        BoundaryLoop(in_t("1 - t/(2*pi)"), in_t("1")), P);
    CHECK(wavy.contains({0.25, 0.105}));
    CHECK(!wavy.contains({0.25, 0.095}));

    // wrong traversal direction rejected
    CHECK_THROWS_AS(PlanarDomain::strip(BoundaryLoop(in_t("1 - t/(2*pi)"), in_t("0")),
                                        BoundaryLoop(in_t("t/(2*pi)"), in_t("1")), P),
                    DomainError);
}

TEST_CASE("lambda sign flips across a traced singular arc") {
    SurfaceMap fold = fold_map();
    // the arc is {v = 0}; sample offsets along the null direction
    for (double u : {-0.5, 0.0, 0.6}) {
        Vec2 eta = fold.null_direction({u, 0.0}, {1.0, 0.0});
        double lp = fold.lambda(Vec2{u, 0.0} + eta * 1e-3);
        double lm = fold.lambda(Vec2{u, 0.0} - eta * 1e-3);
        CHECK(lp * lm < 0.0);
    }
}
