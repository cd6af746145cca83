#pragma once

#include <functional>
#include <optional>

#include "gbmap/expr.hpp"
#include "gbmap/geom.hpp"

namespace gbmap {

// Degenerate or invalid metric data (EG - F^2 <= 0, mismatched user K, ...).
struct MetricError : Error {
    using Error::Error;
};

// A curve jet hit a point where the metric norm of the velocity vanishes.
struct ZeroVelocityError : Error {
    using Error::Error;
};

// Validity region of a chart: a rectangle or a disk in chart coordinates.
struct ChartRegion {
    enum class Kind { Rect, Disk };
    Kind kind = Kind::Rect;
    BBox rect;            // Rect
    Vec2 center;          // Disk
    double radius = 1.0;  // Disk

    static ChartRegion rectangle(double xmin, double xmax, double ymin, double ymax) {
        ChartRegion r;
        r.kind = Kind::Rect;
        r.rect = {xmin, xmax, ymin, ymax};
        return r;
    }
    static ChartRegion disk(Vec2 center, double radius) {
        ChartRegion r;
        r.kind = Kind::Disk;
        r.center = center;
        r.radius = radius;
        r.rect = {center.x - radius, center.x + radius, center.y - radius, center.y + radius};
        return r;
    }
};

struct Christoffels {
    // G[k][i][j] = Gamma^k_ij, symmetric in i,j
    double G[2][2][2] = {};
};

// A single target chart (N, g) with metric components E, F, G as symbolic
// expressions in chart coordinates (x, y). Immutable after construction;
// all queries are pure and thread-safe.
//
// Orthonormal frame convention: e1 = (1/sqrt(E)) d/dx, e2 completes it by
// Gram-Schmidt to a positively oriented pair. All angle computations use
// this frame.
class MetricChart {
public:
    // Validates positive-definiteness on a sample of the region and, when a
    // user curvature expression is supplied, checks it against the Brioschi
    // value at 100 sample points (tolerance 1e-6).
    MetricChart(Expr E, Expr F, Expr G, ChartRegion region,
                std::optional<Expr> user_curvature = std::nullopt,
                std::optional<double> period_x = std::nullopt);

    static MetricChart flat(ChartRegion region,
                            std::optional<double> period_x = std::nullopt);

    // Wrap the x coordinate into the fundamental period, if periodic.
    Vec2 wrap(Vec2 q) const;
    bool contains(Vec2 q) const;
    const ChartRegion& region() const { return region_; }
    std::optional<double> period_x() const { return period_x_; }

    // Difference a - b with the x component reduced modulo the period.
    Vec2 wrapped_diff(Vec2 a, Vec2 b) const;

    double E(Vec2 q) const;
    double F(Vec2 q) const;
    double G(Vec2 q) const;

    // sqrt(EG - F^2); throws MetricError if the metric degenerates at q.
    double area_density(Vec2 q) const;
    const Expr& area_density_expr() const { return W_; }

    // Gaussian curvature via the Brioschi formula assembled from symbolic
    // first and second partials of E, F, G. One code path for all charts.
    double gaussian_curvature(Vec2 q) const;
    const Expr& gaussian_curvature_expr() const { return K_; }
    bool is_flat() const { return K_.is_zero(); }

    Christoffels christoffel(Vec2 q) const;

    // (D_t X)^k = dX_dt^k + Gamma^k_ij velocity^i X^j
    Vec2 covariant_derivative(Vec2 q, Vec2 velocity, Vec2 X, Vec2 dX_dt) const;

    // Geodesic curvature per unit g-arclength of a curve through the jet
    // (pos, vel, acc), with the normal chosen so {T, n} is positively
    // oriented. Throws ZeroVelocityError when |vel|_g vanishes.
    double image_geodesic_curvature(Vec2 pos, Vec2 vel, Vec2 acc) const;

    double metric_dot(Vec2 q, Vec2 A, Vec2 B) const;
    double metric_norm(Vec2 q, Vec2 A) const;

    // J A: rotation of A by +90 degrees with respect to g and the chart
    // orientation (J^2 = -1, g(JA, JB) = g(A, B)).
    Vec2 rotate90(Vec2 q, Vec2 A) const;

    // Signed angle from A to B at q, in (-pi, pi].
    double signed_angle(Vec2 q, Vec2 A, Vec2 B) const;

    // Parallel transport of X along the curve c(s), s in [s0, s1], given by
    // position and velocity callables (classic RK4, `steps` sub-steps).
    Vec2 parallel_transport(const std::function<Vec2(double)>& pos,
                            const std::function<Vec2(double)>& vel,
                            double s0, double s1, int steps, Vec2 X) const;

private:
    double eval_chart(const Expr& e, Vec2 q) const;
    void validate(const std::optional<Expr>& user_curvature) const;

    Expr E_, F_, G_;
    Expr Ex_, Ey_, Fx_, Fy_, Gx_, Gy_;
    Expr Eyy_, Fxy_, Gxx_;
    Expr W2_;  // EG - F^2
    Expr W_;   // sqrt(EG - F^2)
    Expr K_;   // Brioschi curvature
    ChartRegion region_;
    std::optional<double> period_x_;
};

} // namespace gbmap
