#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gbmap/quad.hpp"

using namespace gbmap;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kUV = {"u", "v"};
const std::vector<std::string> kT = {"t"};

Expr uv(const std::string& s) { return parse_expression(s, kUV); }
Expr in_t(const std::string& s) { return parse_expression(s, kT); }

MetricChart big_flat() { return MetricChart::flat(ChartRegion::rectangle(-50, 50, -50, 50)); }

MetricChart sphere_chart() {
    Expr conf = parse_expression("4/(1 + x^2 + y^2)^2", {"x", "y"});
    return MetricChart(conf, Expr::constant(0.0), conf,
                       ChartRegion::rectangle(-3, 3, -3, 3), Expr::constant(1.0));
}

PlanarDomain unit_disk() {
    return PlanarDomain::disk({BoundaryLoop(in_t("cos(t)"), in_t("sin(t)"))});
}

Polyline fold_diameter(double a, double b, int n) {
    Polyline p;
    for (int i = 0; i <= n; ++i) {
        double x = a + (b - a) * i / n;
        p.points.push_back({x, 0.0});
        p.params.push_back(static_cast<double>(i));
    }
    return p;
}

} // namespace

TEST_CASE("adaptive Gauss-Kronrod basics") {
    auto f = [](double t) { return std::exp(-t) * std::sin(5 * t); };
    // exact: integral of e^-t sin 5t = [-e^-t (sin 5t + 5 cos 5t)/26]
    auto F = [](double t) { return -std::exp(-t) * (std::sin(5 * t) + 5 * std::cos(5 * t)) / 26.0; };
    QuadResult r = integrate_curve(f, 0.0, 3.0, {}, 1e-12);
    CHECK(r.value == doctest::Approx(F(3.0) - F(0.0)).epsilon(1e-12));
    CHECK(r.error <= 1e-12);

    // arclength of the unit circle
    auto arc = [](double t) {
        (void)t;
        return 1.0;
    };
    QuadResult c = integrate_curve(arc, 0.0, 2 * kPi, {}, 1e-10);
    CHECK(c.value == doctest::Approx(2 * kPi).epsilon(1e-12));

    // additivity over split points
    auto g = [](double t) { return std::cos(3 * t) + t * t; };
    QuadResult whole = integrate_curve(g, 0.0, 2.0, {}, 1e-13);
    std::vector<double> splits = {0.37, 1.1, 1.62};
    QuadResult split = integrate_curve(g, 0.0, 2.0, splits, 1e-13);
    CHECK(std::abs(whole.value - split.value) < 1e-12);

    // |x - 1| has a kink: a declared split point must make it exact
    auto kink = [](double t) { return std::abs(t - 1.0); };
    std::vector<double> ks = {1.0};
    QuadResult k = integrate_curve(kink, 0.0, 2.0, ks, 1e-13);
    CHECK(k.value == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tightening the tolerance never moves the value beyond the estimate") {
    auto f = [](double t) { return std::sqrt(std::abs(std::sin(7 * t))) + 0.3 * t; };
    QuadResult loose = integrate_curve(f, 0.0, 3.0, {}, 1e-5);
    QuadResult tight = integrate_curve(f, 0.0, 3.0, {}, 1e-7);
    CHECK(std::abs(loose.value - tight.value) <= loose.error + 1e-12);
    CHECK(tight.error <= loose.error + 1e-15);
}

TEST_CASE("integration along an implicit singular arc") {
    SurfaceMap fold(uv("u"), uv("v^2"), big_flat());
    // seed the arc with points *near* the zero set; the projector should pull
    // quadrature nodes back onto it
    Polyline rough = fold_diameter(-0.9, 0.9, 36);
    for (std::size_t i = 0; i < rough.points.size(); ++i)
        rough.points[i].y = 1e-4 * std::sin(3.0 * rough.points[i].x);

    QuadResult len = integrate_on_sigma(fold, rough.points, [](Vec2) { return 1.0; }, 1e-11);
    CHECK(len.value == doctest::Approx(1.8).epsilon(1e-9));

    QuadResult mom = integrate_on_sigma(
        fold, rough.points, [](Vec2 q) { return q.x * q.x; }, 1e-11);
    CHECK(mom.value == doctest::Approx(2.0 * 0.9 * 0.9 * 0.9 / 3.0).epsilon(1e-9));
}

TEST_CASE("region integral: flat target short-circuits to zero") {
    SurfaceMap fold(uv("u"), uv("v^2"), big_flat());
    PlanarDomain disk = unit_disk();
    QuadResult r = integrate_region(fold, disk, RegionMode::Signed, 1e-8, {});
    CHECK(r.value == 0.0);
    CHECK(r.error == 0.0);
    CHECK(r.evals == 0);
}

TEST_CASE("region integral: spherical cap area through the identity map") {
    SurfaceMap ident(uv("u"), uv("v"), sphere_chart());
    PlanarDomain disk = unit_disk();
    // area of the image of the unit disk under stereographic projection: 2 pi
    QuadResult r = integrate_region(ident, disk, RegionMode::Signed, 1e-5, {});
    CHECK(std::abs(r.value - 2 * kPi) < 1e-4);

    // rerunning at tol/10 moves the value by less than the reported estimate
    QuadResult r2 = integrate_region(ident, disk, RegionMode::Signed, 1e-6, {});
    CHECK(std::abs(r.value - r2.value) <= r.error + 1e-6);
}

TEST_CASE("region integral: fold map |lambda| over the unit disk is 8/3") {
    SurfaceMap fold(uv("u"), uv("v^2"), big_flat());
    PlanarDomain disk = unit_disk();
    std::vector<Polyline> sigma = {fold_diameter(-1.0, 1.0, 100)};
    QuadResult r =
        integrate_region(fold, disk, RegionMode::Absolute, 1e-7, sigma, /*unit=*/true);
    CHECK(std::abs(r.value - 8.0 / 3.0) < 1e-6);

    QuadResult plus =
        integrate_region(fold, disk, RegionMode::PlusOnly, 1e-7, sigma, true);
    QuadResult minus =
        integrate_region(fold, disk, RegionMode::MinusOnly, 1e-7, sigma, true);
    QuadResult sgn =
        integrate_region(fold, disk, RegionMode::Signed, 1e-7, sigma, true);
    // signed = plus - minus, absolute = plus + minus
    CHECK(std::abs(sgn.value - (plus.value - minus.value)) <
          sgn.error + plus.error + minus.error + 1e-8);
    CHECK(std::abs(r.value - (plus.value + minus.value)) <
          r.error + plus.error + minus.error + 1e-8);
    CHECK(plus.value == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("boundary geodesic term: identity disk gives 2 pi") {
    SurfaceMap ident(uv("u"), uv("v"), big_flat());
    PlanarDomain disk = unit_disk();
    QuadResult r = boundary_geodesic_term(ident, disk, BoundaryCombination::Formula1,
                                          {{}}, 1e-10);
    CHECK(r.value == doctest::Approx(2 * kPi).epsilon(1e-10));
}

TEST_CASE("boundary geodesic term: flat cylinder boundaries are geodesics") {
    MetricChart cyl = MetricChart::flat(ChartRegion::rectangle(0, 1, -2, 2), 1.0);
    SurfaceMap ident(uv("u"), uv("v"), std::move(cyl));
    PlanarDomain strip = PlanarDomain::strip(BoundaryLoop(in_t("t/(2*pi)"), in_t("0")),
                                             BoundaryLoop(in_t("1 - t/(2*pi)"), in_t("1")),
                                             1.0);
    QuadResult r = boundary_geodesic_term(ident, strip, BoundaryCombination::Formula1,
                                          {{}, {}}, 1e-10);
    CHECK(std::abs(r.value) < 1e-9);
}

TEST_CASE("boundary geodesic term on the fold disk") {
    SurfaceMap fold(uv("u"), uv("v^2"), big_flat());
    PlanarDomain disk = unit_disk();
    // the singular diameter crosses the boundary circle at t = 0 and t = pi
    std::vector<std::vector<double>> splits = {{0.0, kPi}};

    QuadResult f1 = boundary_geodesic_term(fold, disk, BoundaryCombination::Formula1,
                                           splits, 1e-9);
    QuadResult f2p = boundary_geodesic_term(fold, disk, BoundaryCombination::Formula2Plus,
                                            splits, 1e-9);
    QuadResult f2m = boundary_geodesic_term(fold, disk, BoundaryCombination::Formula2Minus,
                                            splits, 1e-9);

    // closed form for this boundary image: the full signed-measure integral
    // is 4 atan 2, split evenly between the two sides
    CHECK(f1.value == doctest::Approx(4.0 * std::atan(2.0)).epsilon(1e-8));
    CHECK(f2p.value == doctest::Approx(2.0 * std::atan(2.0)).epsilon(1e-8));
    CHECK(f2m.value == doctest::Approx(2.0 * std::atan(2.0)).epsilon(1e-8));
    // the signed measure makes formula 1 the sum of the two pieces
    CHECK(f1.value == doctest::Approx(f2p.value + f2m.value).epsilon(2e-6));
    // and the orientation-true combination telescopes to the image integral
    CHECK(std::abs(f2p.value - f2m.value) < 1e-7);
}

TEST_CASE("rectangle quadrature") {
    auto f = [](Vec2 p) { return std::sin(p.x) * std::cos(p.y) + 1.0; };
    BBox box{0.0, kPi, 0.0, kPi / 2};
    QuadResult r = integrate_rect(f, box, 1e-11);
    // integral of sin x cos y over the box = 2 * 1 = 2; plus the area
    CHECK(r.value == doctest::Approx(2.0 + kPi * kPi / 2).epsilon(1e-11));
}
