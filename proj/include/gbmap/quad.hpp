#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gbmap/geom.hpp"
#include "gbmap/mapcore.hpp"
#include "gbmap/polyline.hpp"

namespace gbmap {

struct QuadratureError : Error {
    using Error::Error;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evals = 0;
    bool budget_exceeded = false;
};

// Adaptive Gauss-Kronrod (15-point Kronrod with embedded 7-point Gauss)
// over [a, b], seeded with the given interior split points. Splits mark
// parameters where the integrand is only piecewise smooth (or bounded but
// not differentiable); nodes never land on interval endpoints.
QuadResult integrate_curve(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> splits, double abs_tol,
                           int max_intervals = 20000);

// Adaptive tensor-Gauss integration over a plain rectangle.
QuadResult integrate_rect(const std::function<double(Vec2)>& f, BBox box,
                          double abs_tol, int max_cells = 200000);

// Curve integral of a scalar density (per unit Euclidean chart length)
// along an implicit arc lambda = 0 given by an ordered polyline of points
// already lying on the arc. Each polyline segment is reparametrized by
// projecting its chord onto the arc along a fixed direction, which keeps
// both the position and the exact chain-rule speed |q'(s)| available.
QuadResult integrate_on_sigma(const SurfaceMap& map, std::span<const Vec2> pts,
                              const std::function<double(Vec2)>& density_euclid,
                              double abs_tol);

enum class RegionMode {
    Signed,     // (K_N o f) lambda
    Absolute,   // (K_N o f) |lambda|
    PlusOnly,   // (K_N o f) lambda over {lambda > 0}
    MinusOnly,  // (K_N o f) (-lambda) over {lambda < 0}
};

// Quadtree integration of the curvature 2-forms over M. Cells crossed by
// the singular set or the boundary are subdivided, then clipped against
// the curve at the finest level. `sigma` carries the traced singular
// polylines (each point on lambda = 0). With `unit_curvature` the factor
// (K_N o f) is replaced by 1 (plain area of the chosen 2-form).
QuadResult integrate_region(const SurfaceMap& map, const PlanarDomain& dom,
                            RegionMode mode, double abs_tol,
                            const std::vector<Polyline>& sigma,
                            bool unit_curvature = false, int max_cells = 400000);

enum class BoundaryCombination {
    Formula1,       // integral over all of dM of sgn(lambda) kappa_g^img ds
    Formula2Plus,   // over dM intersect M+ (sgn = +1 there)
    Formula2Minus,  // over dM intersect M-, still with the sgn(lambda) weight
};

// The boundary geodesic-curvature term. The measure is
// sgn(lambda) * kappa_g^img ds, where kappa_g^img is the geodesic curvature
// of the image of the boundary traversed with M on the left and ds the
// pulled-back arclength. `splits_per_loop` lists the boundary crossing
// parameters of the singular set on each loop.
QuadResult boundary_geodesic_term(const SurfaceMap& map, const PlanarDomain& dom,
                                  BoundaryCombination comb,
                                  const std::vector<std::vector<double>>& splits_per_loop,
                                  double abs_tol);

// Pulled-back arclength speed |df(loop'(t))|_g of a boundary loop at t and
// the signed geodesic-curvature density; shared by the boundary term and
// the rotation-index oracles.
struct BoundaryImageJet {
    BoundaryImageJet(const SurfaceMap& map, const BoundaryLoop& loop);

    Vec2 position(double t) const;
    Vec2 velocity(double t) const;
    Vec2 accel(double t) const;
    // kappa_g^img * |c'|_g at parameter t (bounded at null crossings)
    double curvature_density(const MetricChart& target, double t) const;
    double speed(const MetricChart& target, double t) const;

private:
    Expr cx_, cy_, dcx_, dcy_, ddcx_, ddcy_;
};

} // namespace gbmap
