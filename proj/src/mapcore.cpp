#include "gbmap/mapcore.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gbmap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string point_str(Vec2 p) {
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

} // namespace

// ---------------------------------------------------------------------------
// SurfaceMap

SurfaceMap::SurfaceMap(Expr x, Expr y, MetricChart target)
    : x_(std::move(x)), y_(std::move(y)),
      target_(std::make_shared<const MetricChart>(std::move(target))) {
    xu_ = x_.derivative(0);
    xv_ = x_.derivative(1);
    yu_ = y_.derivative(0);
    yv_ = y_.derivative(1);

    Expr det = Expr::sum({Expr::product({xu_, yv_}),
                          Expr::negate(Expr::product({xv_, yu_}))});
    Expr w_at_f = target_->area_density_expr().substituted({x_, y_});
    lambda_ = Expr::product({std::move(w_at_f), std::move(det)});
    lambda_u_ = lambda_.derivative(0);
    lambda_v_ = lambda_.derivative(1);

    // W = (-lambda_v, lambda_u); A = Df W
    Expr w1 = Expr::negate(lambda_v_);
    Expr w2 = lambda_u_;
    A1_ = Expr::sum({Expr::product({xu_, w1}), Expr::product({xv_, w2})});
    A2_ = Expr::sum({Expr::product({yu_, w1}), Expr::product({yv_, w2})});
    A1u_ = A1_.derivative(0);
    A1v_ = A1_.derivative(1);
    A2u_ = A2_.derivative(0);
    A2v_ = A2_.derivative(1);
}

double SurfaceMap::eval_uv(const Expr& e, Vec2 p) const {
    double vals[2] = {p.x, p.y};
    return e.eval(vals);
}

Vec2 SurfaceMap::operator()(Vec2 p) const {
    return {eval_uv(x_, p), eval_uv(y_, p)};
}

Mat2 SurfaceMap::jacobian(Vec2 p) const {
    return {eval_uv(xu_, p), eval_uv(xv_, p), eval_uv(yu_, p), eval_uv(yv_, p)};
}

double SurfaceMap::lambda(Vec2 p) const {
    Vec2 q = (*this)(p);
    if (!target_->contains(q))
        throw ChartExitError("f" + point_str(p) + " = " + point_str(q) +
                             " left the target chart validity region");
    return eval_uv(lambda_, p);
}

Vec2 SurfaceMap::dlambda(Vec2 p) const {
    return {eval_uv(lambda_u_, p), eval_uv(lambda_v_, p)};
}

Vec2 SurfaceMap::null_direction(Vec2 p) const {
    Mat2 J = jacobian(p);
    auto sv = J.singular_values();
    double tol = kRankTol * (sv[0] + 1.0);
    if (sv[0] < tol)
        throw RankError("rank 0 at " + point_str(p) + ": degenerate singular point");
    if (sv[1] > tol)
        throw RankError("rank 2 at " + point_str(p) + ": not a singular point");
    Vec2 eta = J.kernel_direction();
    if (eta.x < 0.0 || (eta.x == 0.0 && eta.y < 0.0)) eta = -eta;
    return eta;
}

Vec2 SurfaceMap::null_direction(Vec2 p, Vec2 orient_against) const {
    Vec2 eta = null_direction(p);
    if (orient_against.cross(eta) < 0.0) eta = -eta;
    return eta;
}

Mat2 SurfaceMap::pullback_metric(Vec2 p) const {
    Vec2 q = (*this)(p);
    if (!target_->contains(q))
        throw ChartExitError("f" + point_str(p) + " = " + point_str(q) +
                             " left the target chart validity region");
    double E = target_->E(q), F = target_->F(q), G = target_->G(q);
    Mat2 g{E, F, F, G};
    Mat2 J = jacobian(p);
    return J.transpose() * g * J;
}

Vec2 SurfaceMap::sing_tangent(Vec2 p) const {
    return {-eval_uv(lambda_v_, p), eval_uv(lambda_u_, p)};
}

Vec2 SurfaceMap::df_sing_tangent(Vec2 p) const {
    return {eval_uv(A1_, p), eval_uv(A2_, p)};
}

Vec2 SurfaceMap::sing_accel_flat(Vec2 p) const {
    Vec2 w = sing_tangent(p);
    return {eval_uv(A1u_, p) * w.x + eval_uv(A1v_, p) * w.y,
            eval_uv(A2u_, p) * w.x + eval_uv(A2v_, p) * w.y};
}

// ---------------------------------------------------------------------------
// BoundaryLoop

BoundaryLoop::BoundaryLoop(Expr u, Expr v, int samples)
    : u_(std::move(u)), v_(std::move(v)),
      du_(u_.derivative(0)), dv_(v_.derivative(0)),
      ddu_(du_.derivative(0)), ddv_(dv_.derivative(0)) {
    poly_.points.resize(samples + 1);
    poly_.params.resize(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        double t = kTwoPi * i / samples;
        poly_.params[i] = t;
        poly_.points[i] = point(t);
    }
    // snap near-closed parametrizations exactly shut (strip loops advance
    // by a period instead and are left alone)
    if ((poly_.points.back() - poly_.points.front()).norm() < 1e-9)
        poly_.points.back() = poly_.points.front();

    double area2 = 0.0;
    double ymin = poly_.points[0].y, ymax = ymin;
    for (std::size_t i = 0; i + 1 < poly_.points.size(); ++i) {
        Vec2 a = poly_.points[i], b = poly_.points[i + 1];
        area2 += a.cross(b);
        ymin = std::min(ymin, a.y);
        ymax = std::max(ymax, a.y);
    }
    signed_area_ = 0.5 * area2;

    ybuckets_.ymin = ymin - 1e-12;
    ybuckets_.ymax = ymax + 1e-12;
    ybuckets_.n = 256;
    ybuckets_.buckets.assign(ybuckets_.n, {});
    double span = ybuckets_.ymax - ybuckets_.ymin;
    if (span <= 0.0) span = 1.0;
    for (std::size_t i = 0; i + 1 < poly_.points.size(); ++i) {
        double y0 = poly_.points[i].y, y1 = poly_.points[i + 1].y;
        int b0 = std::clamp(static_cast<int>((std::min(y0, y1) - ybuckets_.ymin) / span *
                                             ybuckets_.n), 0, ybuckets_.n - 1);
        int b1 = std::clamp(static_cast<int>((std::max(y0, y1) - ybuckets_.ymin) / span *
                                             ybuckets_.n), 0, ybuckets_.n - 1);
        for (int b = b0; b <= b1; ++b)
            ybuckets_.buckets[b].push_back(static_cast<std::uint32_t>(i));
    }
}

Vec2 BoundaryLoop::point(double t) const {
    double vals[1] = {t};
    return {u_.eval(vals), v_.eval(vals)};
}

Vec2 BoundaryLoop::velocity(double t) const {
    double vals[1] = {t};
    return {du_.eval(vals), dv_.eval(vals)};
}

Vec2 BoundaryLoop::accel(double t) const {
    double vals[1] = {t};
    return {ddu_.eval(vals), ddv_.eval(vals)};
}

int BoundaryLoop::winding(Vec2 p) const {
    if (p.y < ybuckets_.ymin || p.y >= ybuckets_.ymax) return 0;
    double span = ybuckets_.ymax - ybuckets_.ymin;
    int b = std::clamp(static_cast<int>((p.y - ybuckets_.ymin) / span * ybuckets_.n), 0,
                       ybuckets_.n - 1);
    int w = 0;
    for (std::uint32_t i : ybuckets_.buckets[b]) {
        Vec2 a = poly_.points[i], c = poly_.points[i + 1];
        if (a.y <= p.y) {
            if (c.y > p.y && (c - a).cross(p - a) > 0.0) ++w;
        } else {
            if (c.y <= p.y && (c - a).cross(p - a) < 0.0) --w;
        }
    }
    return w;
}

double BoundaryLoop::nearest_param(Vec2 p) const {
    double best = std::numeric_limits<double>::max();
    double t = 0.0;
    for (std::size_t i = 0; i < poly_.points.size(); ++i) {
        double d2 = (poly_.points[i] - p).norm2();
        if (d2 < best) {
            best = d2;
            t = poly_.params[i];
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// PlanarDomain

PlanarDomain PlanarDomain::disk(std::vector<BoundaryLoop> loops) {
    if (loops.empty()) throw DomainError("disk-type domain needs an outer loop");
    PlanarDomain d;
    d.kind_ = Kind::Disk;
    d.loops_ = std::move(loops);

    if (d.loops_[0].signed_area() <= 0.0)
        throw DomainError("outer loop must be counterclockwise (region on the left)");
    for (std::size_t i = 1; i < d.loops_.size(); ++i)
        if (d.loops_[i].signed_area() >= 0.0)
            throw DomainError("inner loop " + std::to_string(i) +
                              " must be clockwise (region on the left)");

    for (const auto& loop : d.loops_)
        for (int k = 0; k < 64; ++k)
            if (loop.velocity(kTwoPi * k / 64.0).norm() < 1e-9)
                throw DomainError("boundary loop is not regular (zero velocity)");

    // holes inside the outer region, pairwise disjoint (sampled)
    for (std::size_t i = 1; i < d.loops_.size(); ++i)
        for (int k = 0; k < 16; ++k)
            if (d.loops_[0].winding(d.loops_[i].point(kTwoPi * k / 16.0)) != 1)
                throw DomainError("inner loop " + std::to_string(i) +
                                  " is not inside the outer loop");
    for (std::size_t i = 0; i < d.loops_.size(); ++i)
        for (std::size_t j = i + 1; j < d.loops_.size(); ++j) {
            const auto& pi = d.loops_[i].polyline().points;
            const auto& pj = d.loops_[j].polyline().points;
            for (std::size_t a = 0; a < pi.size(); a += 8) {
                double dmin = std::numeric_limits<double>::max();
                for (std::size_t b = 0; b < pj.size(); b += 8)
                    dmin = std::min(dmin, (pi[a] - pj[b]).norm2());
                if (dmin < 1e-12)
                    throw DomainError("boundary loops are not disjoint");
            }
        }

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& pt : d.loops_[0].polyline().points) {
        xmin = std::min(xmin, pt.x);
        xmax = std::max(xmax, pt.x);
        ymin = std::min(ymin, pt.y);
        ymax = std::max(ymax, pt.y);
    }
    d.bbox_ = {xmin, xmax, ymin, ymax};
    d.build_index();
    return d;
}

PlanarDomain PlanarDomain::strip(BoundaryLoop lower, BoundaryLoop upper, double period) {
    if (period <= 0.0) throw DomainError("strip period must be positive");
    PlanarDomain d;
    d.kind_ = Kind::Strip;
    d.period_u_ = period;
    d.loops_.push_back(std::move(lower));
    d.loops_.push_back(std::move(upper));

    double mean_v[2];
    for (int li = 0; li < 2; ++li) {
        const BoundaryLoop& loop = d.loops_[li];
        double du_sign = li == 0 ? 1.0 : -1.0;
        double sum_v = 0.0;
        for (int k = 0; k < 64; ++k) {
            double t = kTwoPi * k / 64.0;
            Vec2 vel = loop.velocity(t);
            if (vel.norm() < 1e-9)
                throw DomainError("strip loop is not regular (zero velocity)");
            if (vel.x * du_sign <= 0.0)
                throw DomainError(li == 0
                                      ? "lower strip loop must run with du/dt > 0"
                                      : "upper strip loop must run with du/dt < 0");
            sum_v += loop.point(t).y;
        }
        mean_v[li] = sum_v / 64.0;
        double span = loop.point(kTwoPi).x - loop.point(0.0).x;
        if (std::abs(std::abs(span) - period) > 1e-9)
            throw DomainError("strip loop must advance u by exactly one period");
    }
    if (mean_v[0] >= mean_v[1])
        throw DomainError("lower strip loop must lie below the upper one");

    double vmin = 1e300, vmax = -1e300;
    for (const auto& loop : d.loops_)
        for (const auto& pt : loop.polyline().points) {
            vmin = std::min(vmin, pt.y);
            vmax = std::max(vmax, pt.y);
        }
    d.bbox_ = {0.0, period, vmin, vmax};
    d.build_index();
    return d;
}

void PlanarDomain::build_index() {
    BBox box = bbox_.inflated(0.05 * std::max(bbox_.width(), bbox_.height()) + 1e-9);
    boundary_index_ = SegmentGrid(box, 96, 96);
    for (std::size_t li = 0; li < loops_.size(); ++li) {
        const Polyline& poly = loops_[li].polyline();
        for (std::size_t s = 0; s + 1 < poly.points.size(); ++s) {
            Vec2 a = poly.points[s], b = poly.points[s + 1];
            double t0 = poly.params[s], t1 = poly.params[s + 1];
            auto add_with_shift = [&](double shift) {
                Vec2 as{a.x + shift, a.y}, bs{b.x + shift, b.y};
                if (std::max(as.x, bs.x) < box.xmin || std::min(as.x, bs.x) > box.xmax)
                    return;
                boundary_index_.add_segment(as, bs, static_cast<std::int32_t>(li),
                                            static_cast<std::int32_t>(s), t0, t1);
            };
            add_with_shift(0.0);
            if (period_u_) {
                add_with_shift(*period_u_);
                add_with_shift(-*period_u_);
            }
        }
    }
}

int PlanarDomain::chi() const {
    if (kind_ == Kind::Strip) return 0;
    return 1 - static_cast<int>(loops_.size() - 1);
}

Vec2 PlanarDomain::wrap(Vec2 p) const {
    if (!period_u_) return p;
    double P = *period_u_;
    p.x = std::fmod(std::fmod(p.x, P) + P, P);
    return p;
}

Vec2 PlanarDomain::wrapped_diff(Vec2 a, Vec2 b) const {
    Vec2 d = a - b;
    if (period_u_) d.x = std::remainder(d.x, *period_u_);
    return d;
}

double PlanarDomain::graph_v(const BoundaryLoop& loop, double u) const {
    const Polyline& poly = loop.polyline();
    double u0 = poly.points.front().x;
    double u1 = poly.points.back().x;
    bool increasing = u1 > u0;
    double lo = std::min(u0, u1), hi = std::max(u0, u1);
    double P = *period_u_;
    // shift u into the loop's parameter cover [lo, hi)
    double uu = lo + std::fmod(std::fmod(u - lo, P) + P, P);
    if (uu > hi) uu = hi;

    // binary search over the monotone polyline u values
    std::size_t a = 0, b = poly.points.size() - 1;
    while (b - a > 1) {
        std::size_t m = (a + b) / 2;
        double um = poly.points[m].x;
        if ((um <= uu) == increasing)
            a = m;
        else
            b = m;
    }
    double ta = poly.params[a], tb = poly.params[b];
    double ua = poly.points[a].x, ub = poly.points[b].x;
    double t = ub != ua ? ta + (tb - ta) * (uu - ua) / (ub - ua) : ta;
    // polish with Newton on u(t) = uu
    for (int it = 0; it < 3; ++it) {
        Vec2 pt = loop.point(t);
        Vec2 vel = loop.velocity(t);
        if (std::abs(vel.x) < 1e-12) break;
        t -= (pt.x - uu) / vel.x;
    }
    return loop.point(t).y;
}

bool PlanarDomain::contains(Vec2 p) const {
    if (kind_ == Kind::Disk) {
        if (loops_[0].winding(p) != 1) return false;
        for (std::size_t i = 1; i < loops_.size(); ++i)
            if (loops_[i].winding(p) != 0) return false;
        return true;
    }
    double vlo = graph_v(loops_[0], p.x);
    double vhi = graph_v(loops_[1], p.x);
    return p.y >= vlo && p.y <= vhi;
}

double PlanarDomain::distance_to_boundary(Vec2 p) const {
    return std::sqrt(nearest_boundary_dist2(p));
}

double PlanarDomain::nearest_boundary_dist2(Vec2 p) const {
    double best = std::numeric_limits<double>::max();
    Vec2 q = wrap(p);
    for (const auto& loop : loops_) {
        const auto& pts = loop.polyline().points;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            Vec2 a = pts[i], b = pts[i + 1];
            if (period_u_) {
                double P = *period_u_;
                for (double shift : {0.0, P, -P})
                    best = std::min(best, segment_dist2(q, {a.x + shift, a.y},
                                                        {b.x + shift, b.y}));
            } else {
                best = std::min(best, segment_dist2(q, a, b));
            }
        }
    }
    return best;
}

std::pair<int, double> PlanarDomain::nearest_boundary(Vec2 p) const {
    Vec2 q = wrap(p);
    double best = std::numeric_limits<double>::max();
    int best_loop = 0;
    double best_t = 0.0;
    for (std::size_t li = 0; li < loops_.size(); ++li) {
        const Polyline& poly = loops_[li].polyline();
        for (std::size_t i = 0; i + 1 < poly.points.size(); ++i) {
            Vec2 a = poly.points[i], b = poly.points[i + 1];
            double d2 = segment_dist2(q, a, b);
            if (period_u_) {
                double P = *period_u_;
                d2 = std::min(d2, segment_dist2(q, {a.x + P, a.y}, {b.x + P, b.y}));
                d2 = std::min(d2, segment_dist2(q, {a.x - P, a.y}, {b.x - P, b.y}));
            }
            if (d2 < best) {
                best = d2;
                best_loop = static_cast<int>(li);
                best_t = poly.params[i];
            }
        }
    }
    return {best_loop, best_t};
}

} // namespace gbmap
