#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "gbmap/expr.hpp"
#include "gbmap/geom.hpp"
#include "gbmap/polyline.hpp"
#include "gbmap/surface.hpp"

namespace gbmap {

// f(p) left the validity region of the target chart.
struct ChartExitError : Error {
    using Error::Error;
};

// null_direction called at a point that is not rank 1.
struct RankError : Error {
    using Error::Error;
};

// Bad domain data: irregular loop, wrong orientation, loops not disjoint, ...
struct DomainError : Error {
    using Error::Error;
};

// The map f : M -> N with cached symbolic jets. Immutable after
// construction; all queries are pure and thread-safe.
class SurfaceMap {
public:
    SurfaceMap(Expr x, Expr y, MetricChart target);

    const MetricChart& target() const { return *target_; }
    const Expr& x_expr() const { return x_; }
    const Expr& y_expr() const { return y_; }

    Vec2 operator()(Vec2 p) const;

    // Matrix of first partials [[x_u, x_v], [y_u, y_v]].
    Mat2 jacobian(Vec2 p) const;

    // Signed area density: lambda = sqrt(EG - F^2)(f(p)) * det Df(p).
    // Throws ChartExitError when f(p) leaves the target validity region.
    double lambda(Vec2 p) const;
    Vec2 dlambda(Vec2 p) const;

    const Expr& lambda_expr() const { return lambda_; }

    // Unit kernel direction of Df at a rank-1 point. Throws RankError when
    // the rank is 0 (degenerate point) or 2 (regular point). Without a
    // reference direction the sign is deterministic; with `orient_against`
    // the sign makes {orient_against, eta} positively oriented.
    Vec2 null_direction(Vec2 p) const;
    Vec2 null_direction(Vec2 p, Vec2 orient_against) const;

    // First fundamental form ds^2 = Df^T g(f(p)) Df.
    Mat2 pullback_metric(Vec2 p) const;

    // The singular tangent field W = (-lambda_v, lambda_u): nonvanishing
    // along a non-degenerate singular set and tangent to it.
    Vec2 sing_tangent(Vec2 p) const;
    // df(W) evaluated at p.
    Vec2 df_sing_tangent(Vec2 p) const;
    // Coordinate derivative of df(W) along W (the Gamma-free part of the
    // covariant acceleration of the singular curve's image).
    Vec2 sing_accel_flat(Vec2 p) const;

    // Rank tolerance: singular values below 1e-8 * (largest + 1) count as 0.
    static constexpr double kRankTol = 1e-8;

private:
    double eval_uv(const Expr& e, Vec2 p) const;

    Expr x_, y_;
    std::shared_ptr<const MetricChart> target_;
    Expr xu_, xv_, yu_, yv_;
    Expr lambda_, lambda_u_, lambda_v_;
    Expr A1_, A2_;                    // df(W) components
    Expr A1u_, A1v_, A2u_, A2v_;
};

// One boundary loop, parametrized over t in [0, 2pi], traversed with M on
// the left (outer loops counterclockwise, inner loops clockwise).
class BoundaryLoop {
public:
    BoundaryLoop(Expr u, Expr v, int samples = 2048);

    Vec2 point(double t) const;
    Vec2 velocity(double t) const;
    Vec2 accel(double t) const;

    const Expr& u_expr() const { return u_; }
    const Expr& v_expr() const { return v_; }

    const Polyline& polyline() const { return poly_; }
    double signed_area() const { return signed_area_; }

    // Winding number of the loop around p (polyline accuracy).
    int winding(Vec2 p) const;

    // Parameter of the approximately nearest polyline vertex to p.
    double nearest_param(Vec2 p) const;

private:
    Expr u_, v_, du_, dv_, ddu_, ddv_;
    Polyline poly_;
    double signed_area_ = 0.0;
    // y-bucket index over polyline segments for winding queries
    struct YBuckets {
        double ymin = 0.0, ymax = 1.0;
        int n = 0;
        std::vector<std::vector<std::uint32_t>> buckets;
    } ybuckets_;
};

// The compact oriented domain M: a disk-type region (outer loop plus
// optional holes) or a u-periodic strip bounded by two loops. chi(M) is
// combinatorial: 1 - #holes for disk-type, 0 for strips.
class PlanarDomain {
public:
    enum class Kind { Disk, Strip };

    // loops[0] is the outer loop (counterclockwise); the rest are holes
    // (clockwise).
    static PlanarDomain disk(std::vector<BoundaryLoop> loops);

    // lower/upper must be graphs over u winding once around the period:
    // lower traversed with du/dt > 0, upper with du/dt < 0.
    static PlanarDomain strip(BoundaryLoop lower, BoundaryLoop upper, double period);

    Kind kind() const { return kind_; }
    std::optional<double> period_u() const { return period_u_; }
    int chi() const;
    const std::vector<BoundaryLoop>& loops() const { return loops_; }
    const BBox& bbox() const { return bbox_; }

    bool contains(Vec2 p) const;

    // Difference a - b with u reduced modulo the period (if any).
    Vec2 wrapped_diff(Vec2 a, Vec2 b) const;
    Vec2 wrap(Vec2 p) const;

    // Distance from p to the boundary polylines.
    double distance_to_boundary(Vec2 p) const;
    double nearest_boundary_dist2(Vec2 p) const;
    // Nearest loop and its polyline parameter.
    std::pair<int, double> nearest_boundary(Vec2 p) const;

    const SegmentGrid& boundary_index() const { return boundary_index_; }

private:
    PlanarDomain() = default;
    void build_index();
    // strip helpers: v of the lower/upper graph at u
    double graph_v(const BoundaryLoop& loop, double u) const;

    Kind kind_ = Kind::Disk;
    std::vector<BoundaryLoop> loops_;
    std::optional<double> period_u_;
    BBox bbox_;
    SegmentGrid boundary_index_;
};

} // namespace gbmap
