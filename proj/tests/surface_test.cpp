#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "gbmap/expr.hpp"
#include "gbmap/surface.hpp"

using namespace gbmap;

namespace {

const std::vector<std::string> kXY = {"x", "y"};

MetricChart flat_chart() {
    return MetricChart::flat(ChartRegion::rectangle(-10, 10, -10, 10));
}

MetricChart sphere_chart() {
    // stereographic chart of the unit sphere, K = +1
    Expr conf = parse_expression("4/(1 + x^2 + y^2)^2", kXY);
    return MetricChart(conf, Expr::constant(0.0), conf,
                       ChartRegion::rectangle(-3, 3, -3, 3),
                       Expr::constant(1.0));
}

MetricChart halfplane_chart() {
    // upper half plane, K = -1
    Expr e = parse_expression("1/y^2", kXY);
    return MetricChart(e, Expr::constant(0.0), e,
                       ChartRegion::rectangle(-4, 4, 0.1, 6),
                       Expr::constant(-1.0));
}

using Fn2 = std::function<double(double, double)>;

// Brioschi curvature from central finite differences of the metric
// components; the test-side oracle for the symbolic computation.
double fd_brioschi(const Fn2& E, const Fn2& F, const Fn2& G, Vec2 q, double h) {
    auto dx = [&](const Fn2& f) { return (f(q.x + h, q.y) - f(q.x - h, q.y)) / (2 * h); };
    auto dy = [&](const Fn2& f) { return (f(q.x, q.y + h) - f(q.x, q.y - h)) / (2 * h); };
    auto dyy = [&](const Fn2& f) {
        return (f(q.x, q.y + h) - 2 * f(q.x, q.y) + f(q.x, q.y - h)) / (h * h);
    };
    auto dxx = [&](const Fn2& f) {
        return (f(q.x + h, q.y) - 2 * f(q.x, q.y) + f(q.x - h, q.y)) / (h * h);
    };
    auto dxy = [&](const Fn2& f) {
        return (f(q.x + h, q.y + h) - f(q.x + h, q.y - h) - f(q.x - h, q.y + h) +
                f(q.x - h, q.y - h)) /
               (4 * h * h);
    };
    double e = E(q.x, q.y), f = F(q.x, q.y), g = G(q.x, q.y);
    double m1[3][3] = {
        {-0.5 * dyy(E) + dxy(F) - 0.5 * dxx(G), 0.5 * dx(E), dx(F) - 0.5 * dy(E)},
        {dy(F) - 0.5 * dx(G), e, f},
        {0.5 * dy(G), f, g}};
    double m2[3][3] = {{0.0, 0.5 * dy(E), 0.5 * dx(G)},
                       {0.5 * dy(E), e, f},
                       {0.5 * dx(G), f, g}};
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    double w2 = e * g - f * f;
    return (det3(m1) - det3(m2)) / (w2 * w2);
}

Fn2 chart_component(const MetricChart& chart, int which) {
    return [&chart, which](double x, double y) {
        Vec2 q{x, y};
        switch (which) {
            case 0: return chart.E(q);
            case 1: return chart.F(q);
            default: return chart.G(q);
        }
    };
}

// Christoffel symbols from finite differences of the metric (independent of
// the symbolic path).
Christoffels fd_christoffel(const MetricChart& chart, Vec2 q, double h) {
    auto g_at = [&](Vec2 p, int i, int j) {
        if (i == 0 && j == 0) return chart.E(p);
        if (i == 1 && j == 1) return chart.G(p);
        return chart.F(p);
    };
    double dg[2][2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            dg[0][i][j] = (g_at({q.x + h, q.y}, i, j) - g_at({q.x - h, q.y}, i, j)) / (2 * h);
            dg[1][i][j] = (g_at({q.x, q.y + h}, i, j) - g_at({q.x, q.y - h}, i, j)) / (2 * h);
        }
    double e = chart.E(q), f = chart.F(q), g = chart.G(q);
    double w2 = e * g - f * f;
    double ginv[2][2] = {{g / w2, -f / w2}, {-f / w2, e / w2}};
    Christoffels out;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                out.G[k][i][j] = 0.5 * s;
            }
    return out;
}

} // namespace

TEST_CASE("area density") {
    MetricChart flat = flat_chart();
    CHECK(flat.area_density({0.3, -2.0}) == doctest::Approx(1.0));

    MetricChart sphere = sphere_chart();
    CHECK(sphere.area_density({0.0, 0.0}) == doctest::Approx(4.0));

    CHECK_THROWS_AS(MetricChart(Expr::constant(1.0), Expr::constant(1.0), Expr::constant(1.0),
                                ChartRegion::rectangle(-1, 1, -1, 1)),
                    MetricError);
}

TEST_CASE("Brioschi curvature on the reference charts") {
    MetricChart flat = flat_chart();
    MetricChart sphere = sphere_chart();
    MetricChart hyp = halfplane_chart();

    CHECK(flat.is_flat());
    CHECK(!sphere.is_flat());

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-0.9, 0.9);
    for (int i = 0; i < 20; ++i) {
        Vec2 q{d(rng), d(rng)};
        CHECK(flat.gaussian_curvature(q) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sphere.gaussian_curvature(q) == doctest::Approx(1.0).epsilon(1e-8));
        Vec2 qh{q.x, 1.5 + q.y};
        CHECK(hyp.gaussian_curvature(qh) == doctest::Approx(-1.0).epsilon(1e-8));
    }
}

TEST_CASE("symbolic Brioschi agrees with the finite-difference oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-0.8, 0.8);

    // a generic non-orthogonal metric to exercise every term
    Expr E = parse_expression("2 + sin(x)*cos(y)", kXY);
    Expr F = parse_expression("0.3*x*y/(1 + x^2 + y^2)", kXY);
    Expr G = parse_expression("2 + x^2/4 + exp(0.2*y)", kXY);
    MetricChart chart(E, F, G, ChartRegion::rectangle(-2, 2, -2, 2));

    std::vector<const MetricChart*> charts = {&chart};
    MetricChart sphere = sphere_chart();
    charts.push_back(&sphere);

    for (const MetricChart* c : charts) {
        Fn2 fE = chart_component(*c, 0), fF = chart_component(*c, 1), fG = chart_component(*c, 2);
        for (int i = 0; i < 100; ++i) {
            Vec2 q{d(rng), d(rng)};
            double kb = c->gaussian_curvature(q);
            double kfd = fd_brioschi(fE, fF, fG, q, 1e-4);
            CHECK(std::abs(kb - kfd) < 1e-5);
        }
    }
}

TEST_CASE("Christoffel symbols") {
    MetricChart flat = flat_chart();
    Christoffels cz = flat.christoffel({1.0, 2.0});
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(cz.G[k][i][j] == doctest::Approx(0.0));

    // half plane: Gamma^1_12 = -1/y
    MetricChart hyp = halfplane_chart();
    Christoffels ch = hyp.christoffel({0.0, 2.0});
    CHECK(ch.G[0][0][1] == doctest::Approx(-0.5).epsilon(1e-12));

    // against finite differences of the metric
    MetricChart sphere = sphere_chart();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-0.8, 0.8);
    for (int i = 0; i < 25; ++i) {
        Vec2 q{d(rng), d(rng)};
        Christoffels a = sphere.christoffel(q);
        Christoffels b = fd_christoffel(sphere, q, 1e-5);
        for (int k = 0; k < 2; ++k)
            for (int ii = 0; ii < 2; ++ii)
                for (int j = 0; j < 2; ++j)
                    CHECK(std::abs(a.G[k][ii][j] - b.G[k][ii][j]) < 1e-7);
    }
}

TEST_CASE("metric compatibility: d/dt <X,X> = 2 <D_t X, X>") {
    MetricChart sphere = sphere_chart();
    auto pos = [](double t) { return Vec2{0.5 * std::cos(t), 0.4 * std::sin(t) + 0.1}; };
    auto vel = [](double t) { return Vec2{-0.5 * std::sin(t), 0.4 * std::cos(t)}; };
    auto X = [](double t) { return Vec2{std::cos(2 * t), 0.3 + std::sin(t)}; };
    auto dX = [](double t) { return Vec2{-2 * std::sin(2 * t), std::cos(t)}; };

    for (double t : {0.0, 0.7, 1.9, 3.0}) {
        double h = 1e-6;
        double np = sphere.metric_dot(pos(t + h), X(t + h), X(t + h));
        double nm = sphere.metric_dot(pos(t - h), X(t - h), X(t - h));
        double lhs = (np - nm) / (2 * h);
        Vec2 dtx = sphere.covariant_derivative(pos(t), vel(t), X(t), dX(t));
        double rhs = 2.0 * sphere.metric_dot(pos(t), dtx, X(t));
        CHECK(std::abs(lhs - rhs) < 1e-6);
    }
}

TEST_CASE("covariant derivative of a parallel-transported field vanishes") {
    MetricChart sphere = sphere_chart();
    auto pos = [](double s) { return Vec2{0.3 * std::cos(s), 0.3 * std::sin(s) + 0.2}; };
    auto vel = [](double s) { return Vec2{-0.3 * std::sin(s), 0.3 * std::cos(s)}; };

    // test-side RK4 transport built on finite-difference Christoffels
    auto rhs = [&](double s, Vec2 x) {
        Christoffels c = fd_christoffel(sphere, pos(s), 1e-5);
        Vec2 v = vel(s);
        double vv[2] = {v.x, v.y}, xx[2] = {x.x, x.y};
        double out[2] = {0, 0};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) out[k] -= c.G[k][i][j] * vv[i] * xx[j];
        return Vec2{out[0], out[1]};
    };
    int steps = 400;
    double s0 = 0.0, s1 = 1.5, h = (s1 - s0) / steps;
    std::vector<Vec2> xs(steps + 1);
    xs[0] = {1.0, 0.3};
    double s = s0;
    for (int i = 0; i < steps; ++i) {
        Vec2 x = xs[i];
        Vec2 k1 = rhs(s, x);
        Vec2 k2 = rhs(s + h / 2, x + (h / 2) * k1);
        Vec2 k3 = rhs(s + h / 2, x + (h / 2) * k2);
        Vec2 k4 = rhs(s + h, x + h * k3);
        xs[i + 1] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
    }

    for (int i = 10; i < steps - 10; i += 37) {
        double si = s0 + i * h;
        Vec2 dx_dt = (xs[i + 1] - xs[i - 1]) / (2 * h);
        Vec2 dt_x = sphere.covariant_derivative(pos(si), vel(si), xs[i], dx_dt);
        CHECK(dt_x.norm() < 1e-5);
    }

    // zero velocity and zero rate: unchanged
    Vec2 z = sphere.covariant_derivative({0.1, 0.1}, {0, 0}, {1, 2}, {0, 0});
    CHECK(z.norm() == doctest::Approx(0.0));

    // the production transport agrees with the oracle path
    Vec2 mine = sphere.parallel_transport(pos, vel, s0, s1, steps, {1.0, 0.3});
    CHECK((mine - xs[steps]).norm() < 1e-6);
}

TEST_CASE("geodesic curvature of reference curves") {
    MetricChart flat = flat_chart();
    // straight line
    CHECK(flat.image_geodesic_curvature({0.2, 0.3}, {1.0, 0.5}, {0.0, 0.0}) ==
          doctest::Approx(0.0));
    // counterclockwise circle of radius R
    double R = 2.5, t = 1.2;
    Vec2 p{R * std::cos(t), R * std::sin(t)};
    Vec2 v{-R * std::sin(t), R * std::cos(t)};
    Vec2 a{-R * std::cos(t), -R * std::sin(t)};
    CHECK(flat.image_geodesic_curvature(p, v, a) == doctest::Approx(1.0 / R).epsilon(1e-12));

    // the unit circle is the stereographic image of the equator: a geodesic
    MetricChart sphere = sphere_chart();
    for (double tt : {0.0, 0.9, 2.2, 4.4}) {
        Vec2 pp{std::cos(tt), std::sin(tt)};
        Vec2 vv{-std::sin(tt), std::cos(tt)};
        Vec2 aa{-std::cos(tt), -std::sin(tt)};
        CHECK(std::abs(sphere.image_geodesic_curvature(pp, vv, aa)) < 1e-8);
    }

    CHECK_THROWS_AS(flat.image_geodesic_curvature({0, 0}, {0, 0}, {1, 1}), ZeroVelocityError);
}

TEST_CASE("geodesic curvature jet transformation rules") {
    MetricChart sphere = sphere_chart();
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> d(-0.7, 0.7);
    for (int i = 0; i < 40; ++i) {
        Vec2 p{d(rng), d(rng)};
        Vec2 v{d(rng) + 1.1, d(rng)};
        Vec2 a{d(rng), d(rng)};
        double k = sphere.image_geodesic_curvature(p, v, a);

        // reversal t -> -t: velocity flips, acceleration is fixed
        double kr = sphere.image_geodesic_curvature(p, -v, a);
        CHECK(kr == doctest::Approx(-k).epsilon(1e-9));

        // positive reparametrization: vel *= s, acc = s^2 acc + r vel
        double sp = 0.25 + std::abs(d(rng));
        double r = d(rng);
        Vec2 v2 = v * sp;
        Vec2 a2 = a * (sp * sp) + v * r;
        double k2 = sphere.image_geodesic_curvature(p, v2, a2);
        CHECK(k2 == doctest::Approx(k).epsilon(1e-9));
    }
}

TEST_CASE("periodic charts wrap the x coordinate") {
    MetricChart cyl = MetricChart::flat(ChartRegion::rectangle(0, 1, -1, 2), 1.0);
    CHECK(cyl.contains({17.25, 0.5}));
    CHECK(!cyl.contains({0.5, 3.0}));
    Vec2 w = cyl.wrap({-0.25, 0.0});
    CHECK(w.x == doctest::Approx(0.75));
    Vec2 dd = cyl.wrapped_diff({0.95, 0.0}, {0.05, 0.0});
    CHECK(dd.x == doctest::Approx(-0.1));
}
