#include "gbmap/surface.hpp"

#include <cmath>
#include <string>

namespace gbmap {

namespace {

Expr half(Expr e) { return Expr::product({Expr::constant(0.5), std::move(e)}); }

Expr diff3(Expr a, Expr b) { return Expr::sum({std::move(a), Expr::negate(std::move(b))}); }

// Determinant of a symbolic 3x3 matrix, rows m[0..2].
Expr det3(const Expr m[3][3]) {
    auto minor2 = [&](int r0, int r1, int c0, int c1) {
        return diff3(Expr::product({m[r0][c0], m[r1][c1]}),
                     Expr::product({m[r0][c1], m[r1][c0]}));
    };
    return Expr::sum({Expr::product({m[0][0], minor2(1, 2, 1, 2)}),
                      Expr::negate(Expr::product({m[0][1], minor2(1, 2, 0, 2)})),
                      Expr::product({m[0][2], minor2(1, 2, 0, 1)})});
}

} // namespace

MetricChart::MetricChart(Expr E, Expr F, Expr G, ChartRegion region,
                         std::optional<Expr> user_curvature,
                         std::optional<double> period_x)
    : E_(std::move(E)), F_(std::move(F)), G_(std::move(G)),
      Ex_(E_.derivative(0)), Ey_(E_.derivative(1)),
      Fx_(F_.derivative(0)), Fy_(F_.derivative(1)),
      Gx_(G_.derivative(0)), Gy_(G_.derivative(1)),
      Eyy_(Ey_.derivative(1)), Fxy_(Fx_.derivative(1)), Gxx_(Gx_.derivative(0)),
      region_(region), period_x_(period_x) {
    W2_ = diff3(Expr::product({E_, G_}), Expr::int_power(F_, 2));
    W_ = Expr::function(UnaryFn::Sqrt, W2_);

    // Brioschi formula: K = (det M1 - det M2) / (EG - F^2)^2
    Expr m1[3][3] = {
        {Expr::sum({Expr::negate(half(Eyy_)), Fxy_, Expr::negate(half(Gxx_))}),
         half(Ex_), diff3(Fx_, half(Ey_))},
        {diff3(Fy_, half(Gx_)), E_, F_},
        {half(Gy_), F_, G_}};
    Expr m2[3][3] = {
        {Expr::constant(0.0), half(Ey_), half(Gx_)},
        {half(Ey_), E_, F_},
        {half(Gx_), F_, G_}};
    K_ = Expr::quotient(diff3(det3(m1), det3(m2)), Expr::int_power(W2_, 2));

    validate(user_curvature);
}

MetricChart MetricChart::flat(ChartRegion region, std::optional<double> period_x) {
    return MetricChart(Expr::constant(1.0), Expr::constant(0.0), Expr::constant(1.0),
                       region, std::nullopt, period_x);
}

Vec2 MetricChart::wrap(Vec2 q) const {
    if (!period_x_) return q;
    double p = *period_x_;
    double x0 = region_.rect.xmin;
    q.x = x0 + std::fmod(std::fmod(q.x - x0, p) + p, p);
    return q;
}

Vec2 MetricChart::wrapped_diff(Vec2 a, Vec2 b) const {
    Vec2 d = a - b;
    if (period_x_) {
        double p = *period_x_;
        d.x = std::remainder(d.x, p);
    }
    return d;
}

bool MetricChart::contains(Vec2 q) const {
    q = wrap(q);
    if (region_.kind == ChartRegion::Kind::Rect) {
        if (period_x_) return q.y >= region_.rect.ymin && q.y <= region_.rect.ymax;
        return region_.rect.contains(q);
    }
    return (q - region_.center).norm() <= region_.radius;
}

double MetricChart::eval_chart(const Expr& e, Vec2 q) const {
    q = wrap(q);
    double vals[2] = {q.x, q.y};
    return e.eval(vals);
}

double MetricChart::E(Vec2 q) const { return eval_chart(E_, q); }
double MetricChart::F(Vec2 q) const { return eval_chart(F_, q); }
double MetricChart::G(Vec2 q) const { return eval_chart(G_, q); }

double MetricChart::area_density(Vec2 q) const {
    double w2 = eval_chart(W2_, q);
    if (w2 <= 0.0)
        throw MetricError("metric degenerates (EG - F^2 <= 0) at (" +
                          std::to_string(q.x) + ", " + std::to_string(q.y) + ")");
    return std::sqrt(w2);
}

double MetricChart::gaussian_curvature(Vec2 q) const {
    area_density(q);  // degeneracy check
    return eval_chart(K_, q);
}

Christoffels MetricChart::christoffel(Vec2 q) const {
    double e = E(q), f = F(q), g = G(q);
    double w2 = e * g - f * f;
    if (w2 <= 0.0)
        throw MetricError("metric degenerates (EG - F^2 <= 0) at (" +
                          std::to_string(q.x) + ", " + std::to_string(q.y) + ")");
    // dg[l][i][j] = d g_ij / d x^l
    double ex = eval_chart(Ex_, q), ey = eval_chart(Ey_, q);
    double fx = eval_chart(Fx_, q), fy = eval_chart(Fy_, q);
    double gx = eval_chart(Gx_, q), gy = eval_chart(Gy_, q);
    double dg[2][2][2] = {{{ex, fx}, {fx, gx}}, {{ey, fy}, {fy, gy}}};
    double ginv[2][2] = {{g / w2, -f / w2}, {-f / w2, e / w2}};

    Christoffels out;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                out.G[k][i][j] = 0.5 * s;
                out.G[k][j][i] = out.G[k][i][j];
            }
    return out;
}

Vec2 MetricChart::covariant_derivative(Vec2 q, Vec2 velocity, Vec2 X, Vec2 dX_dt) const {
    Christoffels c = christoffel(q);
    double v[2] = {velocity.x, velocity.y};
    double xx[2] = {X.x, X.y};
    double out[2] = {dX_dt.x, dX_dt.y};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out[k] += c.G[k][i][j] * v[i] * xx[j];
    return {out[0], out[1]};
}

double MetricChart::metric_dot(Vec2 q, Vec2 A, Vec2 B) const {
    double e = E(q), f = F(q), g = G(q);
    return e * A.x * B.x + f * (A.x * B.y + A.y * B.x) + g * A.y * B.y;
}

double MetricChart::metric_norm(Vec2 q, Vec2 A) const {
    return std::sqrt(std::max(0.0, metric_dot(q, A, A)));
}

Vec2 MetricChart::rotate90(Vec2 q, Vec2 A) const {
    double e = E(q), f = F(q), g = G(q);
    double w = std::sqrt(e * g - f * f);
    return {(-f * A.x - g * A.y) / w, (e * A.x + f * A.y) / w};
}

double MetricChart::signed_angle(Vec2 q, Vec2 A, Vec2 B) const {
    double w = area_density(q);
    return std::atan2(w * A.cross(B), metric_dot(q, A, B));
}

double MetricChart::image_geodesic_curvature(Vec2 pos, Vec2 vel, Vec2 acc) const {
    double speed = metric_norm(pos, vel);
    if (speed < 1e-14)
        throw ZeroVelocityError("zero-velocity jet in geodesic curvature at (" +
                                std::to_string(pos.x) + ", " + std::to_string(pos.y) + ")");
    Vec2 dt_vel = covariant_derivative(pos, vel, vel, acc);
    Vec2 n = rotate90(pos, vel * (1.0 / speed));
    return metric_dot(pos, dt_vel, n) / (speed * speed);
}

Vec2 MetricChart::parallel_transport(const std::function<Vec2(double)>& pos,
                                     const std::function<Vec2(double)>& vel,
                                     double s0, double s1, int steps, Vec2 X) const {
    // dX^k/ds = -Gamma^k_ij c'(s)^i X^j
    auto rhs = [&](double s, Vec2 x) -> Vec2 {
        Christoffels c = christoffel(pos(s));
        Vec2 v = vel(s);
        double vv[2] = {v.x, v.y}, xx[2] = {x.x, x.y};
        double out[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    out[k] -= c.G[k][i][j] * vv[i] * xx[j];
        return {out[0], out[1]};
    };
    double h = (s1 - s0) / steps;
    Vec2 x = X;
    double s = s0;
    for (int i = 0; i < steps; ++i) {
        Vec2 k1 = rhs(s, x);
        Vec2 k2 = rhs(s + 0.5 * h, x + 0.5 * h * k1);
        Vec2 k3 = rhs(s + 0.5 * h, x + 0.5 * h * k2);
        Vec2 k4 = rhs(s + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
    }
    return x;
}

void MetricChart::validate(const std::optional<Expr>& user_curvature) const {
    const BBox& r = region_.rect;
    const int n = 10;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            Vec2 q{r.xmin + (r.xmax - r.xmin) * i / n, r.ymin + (r.ymax - r.ymin) * j / n};
            if (region_.kind == ChartRegion::Kind::Disk) {
                // sample strictly inside the disk
                Vec2 d = q - region_.center;
                double rn = d.norm();
                if (rn > 0.95 * region_.radius)
                    q = region_.center + d * (0.95 * region_.radius / rn);
            } else {
                // keep away from the rectangle edge where the metric may
                // degenerate in limit cases
                q.x = std::min(std::max(q.x, r.xmin + 1e-9), r.xmax - 1e-9);
                q.y = std::min(std::max(q.y, r.ymin + 1e-9), r.ymax - 1e-9);
            }
            double vals[2] = {q.x, q.y};
            double e = E_.eval(vals), g = G_.eval(vals), f = F_.eval(vals);
            if (!(e > 0.0) || !(g > 0.0) || !(e * g - f * f > 0.0))
                throw MetricError("metric not positive definite at sample (" +
                                  std::to_string(q.x) + ", " + std::to_string(q.y) + ")");
            if (user_curvature) {
                double ku = user_curvature->eval(vals);
                double kb = K_.eval(vals);
                if (std::abs(ku - kb) > 1e-6)
                    throw MetricError("user-supplied curvature disagrees with the metric at (" +
                                      std::to_string(q.x) + ", " + std::to_string(q.y) +
                                      "): " + std::to_string(ku) + " vs " + std::to_string(kb));
            }
        }
    }
}

} // namespace gbmap
