#include "gbmap/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gbmap {

namespace {

// QUADPACK 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 5-point and 3-point Gauss-Legendre (tensor rules of degree 9 and 5).
constexpr double kG5x[5] = {-0.906179845938663992797626878299393,
                            -0.538469310105683091036314420700208, 0.0,
                            0.538469310105683091036314420700208,
                            0.906179845938663992797626878299393};
constexpr double kG5w[5] = {0.236926885056189087514264040719917,
                            0.478628670499366468041291514835638,
                            0.568888888888888888888888888888889,
                            0.478628670499366468041291514835638,
                            0.236926885056189087514264040719917};
constexpr double kG3x[3] = {-0.774596669241483377035853079956480, 0.0,
                            0.774596669241483377035853079956480};
constexpr double kG3w[3] = {0.555555555555555555555555555555556,
                            0.888888888888888888888888888888889,
                            0.555555555555555555555555555555556};

// degree-5 7-point triangle rule (barycentric)
struct TriNode {
    double l1, l2, l3, w;
};
constexpr TriNode kTri7[7] = {
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
    {0.059715871789769820459117580973106, 0.470142064105115089770441209513447,
     0.470142064105115089770441209513447, 0.132394152788506180737649387833152},
    {0.470142064105115089770441209513447, 0.059715871789769820459117580973106,
     0.470142064105115089770441209513447, 0.132394152788506180737649387833152},
    {0.470142064105115089770441209513447, 0.470142064105115089770441209513447,
     0.059715871789769820459117580973106, 0.132394152788506180737649387833152},
    {0.797426985353087322398025276169754, 0.101286507323456338800987361915123,
     0.101286507323456338800987361915123, 0.125939180544827152595683945500181},
    {0.101286507323456338800987361915123, 0.797426985353087322398025276169754,
     0.101286507323456338800987361915123, 0.125939180544827152595683945500181},
    {0.101286507323456338800987361915123, 0.101286507323456338800987361915123,
     0.797426985353087322398025276169754, 0.125939180544827152595683945500181}};

struct GkEval {
    double value = 0.0;
    double error = 0.0;
};

GkEval gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double fsum;
        if (i == 7) {
            fsum = f(c);
            ++evals;
        } else {
            double x = h * kXgk[i];
            fsum = f(c - x) + f(c + x);
            evals += 2;
        }
        if (!std::isfinite(fsum))
            throw QuadratureError("non-finite integrand sample near t = " + std::to_string(c));
        resk += kWgk[i] * fsum;
        if (i % 2 == 1) resg += kWg[i / 2] * fsum;
        else if (i == 7) resg += kWg[3] * fsum;
    }
    GkEval out;
    out.value = resk * h;
    out.error = std::abs(resk - resg) * std::abs(h);
    return out;
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace

QuadResult integrate_curve(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> splits, double abs_tol,
                           int max_intervals) {
    QuadResult out;
    if (a == b) return out;

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double s : splits)
        if (s > a && s < b) cuts.push_back(s);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Interval> heap;
    double total = 0.0, toterr = 0.0;
    int count = 0;
    auto push = [&](double x0, double x1) {
        GkEval e = gk15(f, x0, x1, out.evals);
        heap.push({x0, x1, e.value, e.error});
        total += e.value;
        toterr += e.error;
        ++count;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) push(cuts[i], cuts[i + 1]);

    while (toterr > abs_tol && count < max_intervals) {
        Interval worst = heap.top();
        if (worst.error < 1e-18 * std::abs(total) + 1e-300) break;  // roundoff floor
        heap.pop();
        total -= worst.value;
        toterr -= worst.error;
        --count;
        double m = 0.5 * (worst.a + worst.b);
        push(worst.a, m);
        push(m, worst.b);
    }
    if (toterr > abs_tol) out.budget_exceeded = true;
    out.value = total;
    out.error = toterr;
    return out;
}

// ---------------------------------------------------------------------------
// singular-arc integrals

QuadResult integrate_on_sigma(const SurfaceMap& map, std::span<const Vec2> pts,
                              const std::function<double(Vec2)>& density_euclid,
                              double abs_tol) {
    QuadResult out;
    if (pts.size() < 2) return out;
    std::size_t nseg = pts.size() - 1;

    // projection direction per chord: the gradient direction at the midpoint
    std::vector<Vec2> dirs(nseg);
    for (std::size_t i = 0; i < nseg; ++i) {
        Vec2 mid = (pts[i] + pts[i + 1]) * 0.5;
        Vec2 g = map.dlambda(mid);
        double n = g.norm();
        if (n < 1e-12)
            throw QuadratureError("vanishing dlambda along the singular arc");
        dirs[i] = g / n;
    }

    auto f = [&](double t) {
        auto i = std::min(static_cast<std::size_t>(t), nseg - 1);
        double s = t - static_cast<double>(i);
        Vec2 a = pts[i], b = pts[i + 1];
        Vec2 e = dirs[i];
        Vec2 q = a + (b - a) * s;
        for (int it = 0; it < 12; ++it) {
            double l = map.lambda(q);
            Vec2 g = map.dlambda(q);
            double ge = g.dot(e);
            if (std::abs(ge) < 1e-14) break;
            double step = l / ge;
            q -= e * step;
            if (std::abs(step) < 1e-15) break;
        }
        Vec2 g = map.dlambda(q);
        double ge = g.dot(e);
        Vec2 chord = b - a;
        Vec2 qprime = chord - e * (g.dot(chord) / ge);
        return density_euclid(q) * qprime.norm();
    };

    std::vector<double> splits;
    splits.reserve(nseg);
    for (std::size_t i = 1; i < nseg; ++i) splits.push_back(static_cast<double>(i));
    return integrate_curve(f, 0.0, static_cast<double>(nseg), splits, abs_tol);
}

// ---------------------------------------------------------------------------
// rectangle quadrature

namespace {

struct TensorEval {
    double i5 = 0.0, i3 = 0.0;
    bool mixed_sign = false;  // lambda changed sign over the 5x5 lattice
};

template <typename F>
TensorEval tensor_rule(const F& f, const BBox& box, long& evals) {
    double cx = 0.5 * (box.xmin + box.xmax), hx = 0.5 * box.width();
    double cy = 0.5 * (box.ymin + box.ymax), hy = 0.5 * box.height();
    TensorEval out;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double v = f(Vec2{cx + hx * kG5x[i], cy + hy * kG5x[j]});
            if (!std::isfinite(v)) throw QuadratureError("non-finite 2-D integrand sample");
            out.i5 += kG5w[i] * kG5w[j] * v;
            ++evals;
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double v = f(Vec2{cx + hx * kG3x[i], cy + hy * kG3x[j]});
            out.i3 += kG3w[i] * kG3w[j] * v;
            ++evals;
        }
    out.i5 *= hx * hy;
    out.i3 *= hx * hy;
    return out;
}

} // namespace

QuadResult integrate_rect(const std::function<double(Vec2)>& f, BBox box,
                          double abs_tol, int max_cells) {
    QuadResult out;
    double total_area = box.width() * box.height();
    struct Cell {
        BBox box;
        int depth;
    };
    std::vector<Cell> stack{{box, 0}};
    int cells = 0;
    while (!stack.empty()) {
        Cell cell = stack.back();
        stack.pop_back();
        ++cells;
        if (cells > max_cells) {
            out.budget_exceeded = true;
            break;
        }
        TensorEval te = tensor_rule(f, cell.box, out.evals);
        double err = std::abs(te.i5 - te.i3);
        double cell_tol = abs_tol * (cell.box.width() * cell.box.height() / total_area);
        if (err > 0.5 * cell_tol && cell.depth < 24) {
            double mx = 0.5 * (cell.box.xmin + cell.box.xmax);
            double my = 0.5 * (cell.box.ymin + cell.box.ymax);
            stack.push_back({{cell.box.xmin, mx, cell.box.ymin, my}, cell.depth + 1});
            stack.push_back({{mx, cell.box.xmax, cell.box.ymin, my}, cell.depth + 1});
            stack.push_back({{cell.box.xmin, mx, my, cell.box.ymax}, cell.depth + 1});
            stack.push_back({{mx, cell.box.xmax, my, cell.box.ymax}, cell.depth + 1});
        } else {
            out.value += te.i5;
            out.error += err;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// region quadrature with clipping

namespace {

struct RegionIntegrand {
    const SurfaceMap* map;
    RegionMode mode;
    bool unit_curvature;

    // weight(lambda) per mode; zero outside the selected sign region
    double weight(double lambda) const {
        switch (mode) {
            case RegionMode::Signed: return lambda;
            case RegionMode::Absolute: return std::abs(lambda);
            case RegionMode::PlusOnly: return lambda > 0.0 ? lambda : 0.0;
            case RegionMode::MinusOnly: return lambda < 0.0 ? -lambda : 0.0;
        }
        return 0.0;
    }

    double curvature_at(Vec2 p) const {
        if (unit_curvature) return 1.0;
        Vec2 q = (*map)(p);
        return map->target().gaussian_curvature(q);
    }

    // integrand assuming the cell/polygon has uniform lambda sign
    double value(Vec2 p) const { return curvature_at(p) * weight(map->lambda(p)); }
};

double polygon_area(const std::vector<Vec2>& poly) {
    double a2 = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        a2 += poly[i].cross(poly[(i + 1) % poly.size()]);
    return 0.5 * a2;
}

// Integrate a smooth function over a simple polygon by fanning triangles
// from a robust interior point. Returns false when the fan degenerates.
template <typename F>
bool integrate_polygon(const std::vector<Vec2>& poly, const F& f, double& value,
                       double& error, long& evals, Vec2& rep_point) {
    if (poly.size() < 3) {
        value = 0.0;
        error = 0.0;
        return true;
    }
    double area = polygon_area(poly);
    if (std::abs(area) < 1e-30) {
        value = 0.0;
        error = 0.0;
        return true;
    }
    // area-weighted centroid
    Vec2 cen{0, 0};
    double a2 = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        double w = a.cross(b);
        cen += (a + b) * w;
        a2 += w;
    }
    cen = cen / (3.0 * a2);

    double sign = area > 0.0 ? 1.0 : -1.0;
    value = 0.0;
    error = 0.0;
    double best_tri_area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        double tri2 = (b - a).cross(cen - a);
        if (tri2 * sign < -1e-14 * std::abs(a2)) return false;  // not star-shaped
        double tri_area = 0.5 * tri2 * sign;
        if (tri_area <= 0.0) continue;
        double i7 = 0.0;
        for (const TriNode& n : kTri7) {
            Vec2 p = a * n.l1 + b * n.l2 + cen * n.l3;
            i7 += n.w * f(p);
            ++evals;
        }
        double fc = f(a * (1.0 / 3) + b * (1.0 / 3) + cen * (1.0 / 3));
        ++evals;
        value += i7 * tri_area;
        error += std::abs(i7 - fc) * tri_area * 1e-3;
        if (tri_area > best_tri_area) {
            best_tri_area = tri_area;
            rep_point = a * (1.0 / 3) + b * (1.0 / 3) + cen * (1.0 / 3);
        }
    }
    return true;
}

// perimeter coordinate of a point on the box boundary, in [0, 4)
double perimeter_coord(const BBox& box, Vec2 p) {
    double w = box.width(), h = box.height();
    double dxmin = std::abs(p.y - box.ymin), dxmax = std::abs(p.y - box.ymax);
    double dymin = std::abs(p.x - box.xmin), dymax = std::abs(p.x - box.xmax);
    double m = std::min({dxmin, dxmax, dymin, dymax});
    if (m == dxmin) return (p.x - box.xmin) / w;                    // bottom
    if (m == dymax) return 1.0 + (p.y - box.ymin) / h;              // right
    if (m == dxmax) return 2.0 + (box.xmax - p.x) / w;              // top
    return 3.0 + (box.ymax - p.y) / h;                              // left
}

Vec2 perimeter_point(const BBox& box, double s) {
    s = std::fmod(std::fmod(s, 4.0) + 4.0, 4.0);
    if (s < 1.0) return {box.xmin + s * box.width(), box.ymin};
    if (s < 2.0) return {box.xmax, box.ymin + (s - 1.0) * box.height()};
    if (s < 3.0) return {box.xmax - (s - 2.0) * box.width(), box.ymax};
    return {box.xmin, box.ymax - (s - 3.0) * box.height()};
}

// split the box into two polygons along the barrier polyline whose
// endpoints lie on the box perimeter
void split_box(const BBox& box, const std::vector<Vec2>& barrier,
               std::vector<Vec2>& polyA, std::vector<Vec2>& polyB) {
    double s0 = perimeter_coord(box, barrier.front());
    double s1 = perimeter_coord(box, barrier.back());
    polyA.assign(barrier.begin(), barrier.end());
    // walk counterclockwise from s1 to s0
    double s = s1;
    double send = s0 <= s1 ? s0 + 4.0 : s0;
    for (double corner = std::ceil(s + 1e-12); corner < send - 1e-12; corner += 1.0)
        polyA.push_back(perimeter_point(box, corner));

    polyB.assign(barrier.rbegin(), barrier.rend());
    s = s0;
    send = s1 <= s0 ? s1 + 4.0 : s1;
    for (double corner = std::ceil(s + 1e-12); corner < send - 1e-12; corner += 1.0)
        polyB.push_back(perimeter_point(box, corner));
}

struct RegionWork {
    const SurfaceMap* map = nullptr;
    const PlanarDomain* dom = nullptr;
    RegionIntegrand integrand;
    const SegmentGrid* sigma_index = nullptr;
    double margin_b = 0.0, margin_s = 0.0;
    double total_area = 1.0;
    double abs_tol = 1e-8;
    int clip_depth = 7;
    int hard_max = 13;
    int smooth_max = 17;
    int max_cells = 400000;
    bool sigma_relevant = false;

    QuadResult out;
    int cells = 0;
    std::vector<const SegmentGrid::Entry*> scratch;

    void run(const BBox& root);
    void handle(const BBox& box, int depth);
    void recurse(const BBox& box, int depth);
    void smooth_cell(const BBox& box, int depth);
    void clipped_cell(const BBox& box, int depth);
    bool build_sigma_barrier(const BBox& box, std::vector<Vec2>& barrier, int& crossings);
    void integrate_clipped_polygon(std::vector<Vec2>& poly, bool boundary_barrier);
    void fallback_estimate(const BBox& box);
    double lambda_at(Vec2 p) const { return map->lambda(p); }
};

void RegionWork::run(const BBox& root) {
    total_area = root.width() * root.height();
    handle(root, 0);
}

void RegionWork::recurse(const BBox& box, int depth) {
    double mx = 0.5 * (box.xmin + box.xmax), my = 0.5 * (box.ymin + box.ymax);
    handle({box.xmin, mx, box.ymin, my}, depth + 1);
    handle({mx, box.xmax, box.ymin, my}, depth + 1);
    handle({box.xmin, mx, my, box.ymax}, depth + 1);
    handle({mx, box.xmax, my, box.ymax}, depth + 1);
}

void RegionWork::handle(const BBox& box, int depth) {
    if (out.budget_exceeded) return;
    if (++cells > max_cells) {
        out.budget_exceeded = true;
        return;
    }
    bool touches_b = dom->boundary_index().any_segment_in_box(box.inflated(margin_b));
    Vec2 center{0.5 * (box.xmin + box.xmax), 0.5 * (box.ymin + box.ymax)};
    if (!touches_b && !dom->contains(center)) return;

    bool touches_s = sigma_relevant && !sigma_index->empty() &&
                     sigma_index->any_segment_in_box(box.inflated(margin_s));
    if (touches_b || touches_s) {
        if (depth < clip_depth) recurse(box, depth);
        else clipped_cell(box, depth);
        return;
    }
    smooth_cell(box, depth);
}

void RegionWork::smooth_cell(const BBox& box, int depth) {
    bool mixed = false;
    double sign_seen = 0.0;
    auto f = [&](Vec2 p) {
        double l = lambda_at(p);
        if (sigma_relevant) {
            double s = l > 0.0 ? 1.0 : (l < 0.0 ? -1.0 : 0.0);
            if (s != 0.0) {
                if (sign_seen == 0.0) sign_seen = s;
                else if (s != sign_seen) mixed = true;
            }
        }
        return integrand.curvature_at(p) * integrand.weight(l);
    };
    TensorEval te = tensor_rule(f, box, out.evals);
    if (mixed) {
        // the 5x5 lattice saw a sign change the curve index missed
        if (depth < hard_max) recurse(box, depth);
        else fallback_estimate(box);
        return;
    }
    double err = std::abs(te.i5 - te.i3);
    double cell_tol = 0.7 * abs_tol * (box.width() * box.height() / total_area);
    if (err > cell_tol && depth < smooth_max) {
        recurse(box, depth);
        return;
    }
    out.value += te.i5;
    out.error += err;
}

void RegionWork::fallback_estimate(const BBox& box) {
    // last-resort membership-weighted estimate for corner cells where
    // several feature curves meet; cells this deep are tiny
    double sum = 0.0, amax = 0.0;
    int n = 5, inside = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec2 p{box.xmin + box.width() * (i + 0.5) / n,
                   box.ymin + box.height() * (j + 0.5) / n};
            if (!dom->contains(p)) continue;
            ++inside;
            double v = integrand.value(p);
            sum += v;
            amax = std::max(amax, std::abs(v));
            ++out.evals;
        }
    double area = box.width() * box.height();
    out.value += sum / (n * n) * area;
    out.error += amax * area;
}

// Refine an implicit-curve barrier of lambda = 0 across the box. Returns
// false when the crossing pattern is not a single arc.
bool RegionWork::build_sigma_barrier(const BBox& box, std::vector<Vec2>& barrier,
                                     int& crossings) {
    // find sign-change brackets on the 4 edges (9 samples each)
    std::vector<Vec2> roots;
    auto scan_edge = [&](Vec2 a, Vec2 b) {
        const int n = 8;
        double prev = lambda_at(a);
        Vec2 prev_p = a;
        for (int i = 1; i <= n; ++i) {
            Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
            double cur = lambda_at(p);
            ++out.evals;
            if (prev == 0.0) prev = cur > 0 ? -1e-300 : 1e-300;
            if (prev * cur < 0.0) {
                Vec2 lo = prev_p, hi = p;
                double flo = prev;
                for (int it = 0; it < 60; ++it) {
                    Vec2 mid = (lo + hi) * 0.5;
                    double fm = lambda_at(mid);
                    if (flo * fm <= 0.0) hi = mid;
                    else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push_back((lo + hi) * 0.5);
            }
            prev = cur;
            prev_p = p;
        }
    };
    scan_edge({box.xmin, box.ymin}, {box.xmax, box.ymin});
    scan_edge({box.xmax, box.ymin}, {box.xmax, box.ymax});
    scan_edge({box.xmax, box.ymax}, {box.xmin, box.ymax});
    scan_edge({box.xmin, box.ymax}, {box.xmin, box.ymin});
    crossings = static_cast<int>(roots.size());
    if (crossings != 2) return false;

    // adaptive refinement: project chord midpoints onto lambda = 0
    auto project = [&](Vec2 p) {
        for (int it = 0; it < 15; ++it) {
            double l = lambda_at(p);
            Vec2 g = map->dlambda(p);
            double g2 = g.norm2();
            if (g2 < 1e-20) break;
            Vec2 step = g * (l / g2);
            p -= step;
            if (step.norm() < 1e-15) break;
        }
        return p;
    };
    double sag_tol = 1e-6 * std::max(box.width(), box.height());
    barrier.clear();
    barrier.push_back(roots[0]);
    // midpoint subdivision, depth-first to keep order
    std::function<void(Vec2, Vec2, int)> refine = [&](Vec2 a, Vec2 b, int depth) {
        Vec2 mid = project((a + b) * 0.5);
        double sag = segment_dist2(mid, a, b);
        if (depth < 12 && sag > sag_tol * sag_tol) {
            refine(a, mid, depth + 1);
            barrier.push_back(mid);
            refine(mid, b, depth + 1);
        }
    };
    refine(roots[0], roots[1], 0);
    barrier.push_back(roots[1]);
    return true;
}

void RegionWork::integrate_clipped_polygon(std::vector<Vec2>& poly, bool boundary_barrier) {
    double value = 0.0, err = 0.0;
    Vec2 rep{0, 0};
    // representative interior point (centroid of the largest fan triangle)
    // decides membership and the lambda sign for the whole piece
    double a2 = 0.0;
    Vec2 cen{0, 0};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        double w = a.cross(b);
        cen += (a + b) * w;
        a2 += w;
    }
    if (std::abs(a2) < 1e-30) return;
    cen = cen / (3.0 * a2);
    double best = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        double tri = 0.5 * (b - a).cross(cen - a) * (a2 > 0 ? 1.0 : -1.0);
        if (tri > best) {
            best = tri;
            rep = (a + b + cen) * (1.0 / 3.0);
        }
    }
    if (best <= 0.0) return;

    if (boundary_barrier) {
        if (!dom->contains(rep)) return;  // the outside piece
    }
    double lrep = lambda_at(rep);
    double sgn = lrep > 0.0 ? 1.0 : -1.0;
    double wfactor;
    switch (integrand.mode) {
        case RegionMode::Signed: wfactor = 1.0; break;
        case RegionMode::Absolute: wfactor = sgn; break;
        case RegionMode::PlusOnly:
            if (sgn < 0.0) return;
            wfactor = 1.0;
            break;
        case RegionMode::MinusOnly:
            if (sgn > 0.0) return;
            wfactor = -1.0;
            break;
        default: wfactor = 1.0;
    }
    auto fw = [&](Vec2 p) { return integrand.curvature_at(p) * lambda_at(p) * wfactor; };
    Vec2 rep2;
    if (!integrate_polygon(poly, fw, value, err, out.evals, rep2)) {
        // degenerate fan; fall back to the membership estimate on the bbox
        return;
    }
    out.value += value;
    out.error += err;
}

void RegionWork::clipped_cell(const BBox& box, int depth) {
    // boundary windows
    scratch.clear();
    dom->boundary_index().query(box.inflated(margin_b), scratch);
    struct Window {
        int loop;
        double t0, t1;
    };
    std::vector<std::pair<int, std::pair<double, double>>> segs;
    for (const auto* e : scratch)
        if (segment_intersects_box(e->a, e->b, box))
            segs.push_back({e->tag, {e->t0, e->t1}});
    std::sort(segs.begin(), segs.end());
    std::vector<Window> windows;
    for (const auto& s : segs) {
        if (!windows.empty() && windows.back().loop == s.first &&
            s.second.first <= windows.back().t1 + 0.02)
            windows.back().t1 = std::max(windows.back().t1, s.second.second);
        else
            windows.push_back({s.first, s.second.first, s.second.second});
    }

    bool sigma_here = false;
    std::vector<Vec2> sbarrier;
    int scrossings = 0;
    if (sigma_relevant)
        sigma_here = sigma_index->any_segment_in_box(box.inflated(margin_s));

    Vec2 center{0.5 * (box.xmin + box.xmax), 0.5 * (box.ymin + box.ymax)};
    int nfeatures = static_cast<int>(windows.size()) + (sigma_here ? 1 : 0);
    if (nfeatures == 0) {
        // the feature curve only grazed the inflated margin
        if (dom->contains(center)) smooth_cell(box, depth);
        return;
    }
    if (nfeatures > 1) {
        if (depth < hard_max) recurse(box, depth);
        else fallback_estimate(box);
        return;
    }

    if (sigma_here) {
        if (!build_sigma_barrier(box, sbarrier, scrossings)) {
            if (scrossings == 0) {
                // curve only grazes the inflated box; integrate as smooth
                if (dom->contains(center)) smooth_cell(box, depth);
                return;
            }
            if (depth < hard_max) recurse(box, depth);
            else fallback_estimate(box);
            return;
        }
        // cell near sigma lies inside M (sigma windows exclude boundary cells)
        std::vector<Vec2> A, B;
        split_box(box, sbarrier, A, B);
        integrate_clipped_polygon(A, false);
        integrate_clipped_polygon(B, false);
        return;
    }

    // single boundary-loop window: refine the entry/exit parameters
    const Window& w = windows[0];
    const BoundaryLoop& loop = dom->loops()[static_cast<std::size_t>(w.loop)];
    auto inside_box = [&](double t) {
        Vec2 p = loop.point(t);
        if (dom->period_u()) {
            double P = *dom->period_u();
            for (double shift : {0.0, P, -P})
                if (box.contains({p.x + shift, p.y})) return true;
            return false;
        }
        return box.contains(p);
    };
    // the window may start/end inside or outside the box; walk to brackets
    double t0 = w.t0, t1 = w.t1;
    double step = std::max(1e-4, (t1 - t0) * 0.05);
    auto refine_cross = [&](double tin, double tout) {
        for (int it = 0; it < 60; ++it) {
            double tm = 0.5 * (tin + tout);
            if (inside_box(tm)) tin = tm;
            else tout = tm;
        }
        return 0.5 * (tin + tout);
    };
    // collect the sub-intervals of [t0 - step, t1 + step] that are inside
    double lo = t0 - step, hi = t1 + step;
    int nscan = 64;
    std::vector<std::pair<double, double>> inside_spans;
    bool in = inside_box(lo);
    double cur = lo;
    for (int i = 1; i <= nscan; ++i) {
        double t = lo + (hi - lo) * i / nscan;
        bool now = inside_box(t);
        if (now != in) {
            double tc = refine_cross(now ? t : cur, now ? cur : t);
            if (now) cur = tc;
            else inside_spans.push_back({cur, tc});
            in = now;
        }
        if (!now) cur = t;
        else if (i == nscan) inside_spans.push_back({cur, t});
    }
    if (inside_spans.empty()) {
        if (dom->contains(center)) smooth_cell(box, depth);
        return;
    }
    if (inside_spans.size() > 1) {
        if (depth < hard_max) recurse(box, depth);
        else fallback_estimate(box);
        return;
    }

    auto [ta, tb] = inside_spans[0];
    // sample the barrier, wrapping each point toward the box center when
    // the domain is periodic (the arc may straddle the seam)
    double cx = 0.5 * (box.xmin + box.xmax);
    auto loop_pt = [&](double t) {
        Vec2 p = loop.point(t);
        if (dom->period_u()) p.x = cx + std::remainder(p.x - cx, *dom->period_u());
        return p;
    };
    // refine until the polyline sagitta is negligible at this cell size
    double sag_tol = 1e-6 * std::max(box.width(), box.height());
    std::vector<Vec2> barrier;
    std::function<void(double, Vec2, double, Vec2, int)> refine_b =
        [&](double t0c, Vec2 p0, double t1c, Vec2 p1, int d) {
            double tm = 0.5 * (t0c + t1c);
            Vec2 pm = loop_pt(tm);
            if (d < 10 && segment_dist2(pm, p0, p1) > sag_tol * sag_tol) {
                refine_b(t0c, p0, tm, pm, d + 1);
                barrier.push_back(pm);
                refine_b(tm, pm, t1c, p1, d + 1);
            }
        };
    int nb = 8;
    barrier.push_back(loop_pt(ta));
    for (int i = 0; i < nb; ++i) {
        double u0 = ta + (tb - ta) * i / nb, u1 = ta + (tb - ta) * (i + 1) / nb;
        Vec2 p0 = loop_pt(u0), p1 = loop_pt(u1);
        refine_b(u0, p0, u1, p1, 0);
        barrier.push_back(p1);
    }
    // clamp endpoints onto the box perimeter
    auto clamp_pt = [&](Vec2 p) {
        p.x = std::clamp(p.x, box.xmin, box.xmax);
        p.y = std::clamp(p.y, box.ymin, box.ymax);
        return p;
    };
    barrier.front() = clamp_pt(barrier.front());
    barrier.back() = clamp_pt(barrier.back());

    std::vector<Vec2> A, B;
    split_box(box, barrier, A, B);
    integrate_clipped_polygon(A, true);
    integrate_clipped_polygon(B, true);
}

} // namespace

QuadResult integrate_region(const SurfaceMap& map, const PlanarDomain& dom,
                            RegionMode mode, double abs_tol,
                            const std::vector<Polyline>& sigma,
                            bool unit_curvature, int max_cells) {
    QuadResult zero;
    if (!unit_curvature && map.target().is_flat()) return zero;  // K_N == 0 exactly

    RegionWork work;
    work.map = &map;
    work.dom = &dom;
    work.integrand = {&map, mode, unit_curvature};
    work.abs_tol = abs_tol;
    work.max_cells = max_cells;
    work.sigma_relevant = mode != RegionMode::Signed;

    BBox root = dom.bbox();
    // small inflation so the boundary itself is interior to the root box
    if (!dom.period_u()) root = root.inflated(1e-6 * std::max(root.width(), root.height()));

    SegmentGrid sigma_index(root.inflated(0.01 * root.width()), 128, 128);
    double max_seg = 0.0;
    for (std::size_t ci = 0; ci < sigma.size(); ++ci) {
        const Polyline& poly = sigma[ci];
        for (std::size_t i = 0; i + 1 < poly.points.size(); ++i) {
            Vec2 a = poly.points[i], b = poly.points[i + 1];
            max_seg = std::max(max_seg, (b - a).norm());
            auto add = [&](double shift) {
                sigma_index.add_segment({a.x + shift, a.y}, {b.x + shift, b.y},
                                        static_cast<std::int32_t>(ci),
                                        static_cast<std::int32_t>(i), 0.0, 0.0);
            };
            add(0.0);
            if (dom.period_u()) {
                add(*dom.period_u());
                add(-*dom.period_u());
            }
        }
    }
    work.sigma_index = &sigma_index;
    work.margin_s = 1.5 * max_seg + 1e-9;

    double bseg = 0.0;
    for (const auto& loop : dom.loops()) {
        const auto& pts = loop.polyline().points;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            bseg = std::max(bseg, (pts[i + 1] - pts[i]).norm());
    }
    work.margin_b = 1.5 * bseg + 1e-9;

    work.run(root);
    return work.out;
}

// ---------------------------------------------------------------------------
// boundary term

BoundaryImageJet::BoundaryImageJet(const SurfaceMap& map, const BoundaryLoop& loop) {
    std::vector<Expr> reps = {loop.u_expr(), loop.v_expr()};
    cx_ = map.x_expr().substituted(reps);
    cy_ = map.y_expr().substituted(reps);
    dcx_ = cx_.derivative(0);
    dcy_ = cy_.derivative(0);
    ddcx_ = dcx_.derivative(0);
    ddcy_ = dcy_.derivative(0);
}

Vec2 BoundaryImageJet::position(double t) const {
    double v[1] = {t};
    return {cx_.eval(v), cy_.eval(v)};
}
Vec2 BoundaryImageJet::velocity(double t) const {
    double v[1] = {t};
    return {dcx_.eval(v), dcy_.eval(v)};
}
Vec2 BoundaryImageJet::accel(double t) const {
    double v[1] = {t};
    return {ddcx_.eval(v), ddcy_.eval(v)};
}

double BoundaryImageJet::speed(const MetricChart& target, double t) const {
    return target.metric_norm(position(t), velocity(t));
}

double BoundaryImageJet::curvature_density(const MetricChart& target, double t) const {
    Vec2 pos = position(t);
    Vec2 vel = velocity(t);
    Vec2 acc = accel(t);
    double sp = target.metric_norm(pos, vel);
    if (sp < 1e-11)
        throw ZeroVelocityError(
            "df kills the boundary tangent away from recorded crossings (t = " +
            std::to_string(t) + ")");
    Vec2 dt_vel = target.covariant_derivative(pos, vel, vel, acc);
    Vec2 n = target.rotate90(pos, vel / sp);
    // kappa_g^img |c'| = <D_t c', n> / |c'|
    return target.metric_dot(pos, dt_vel, n) / sp;
}

QuadResult boundary_geodesic_term(const SurfaceMap& map, const PlanarDomain& dom,
                                  BoundaryCombination comb,
                                  const std::vector<std::vector<double>>& splits_per_loop,
                                  double abs_tol) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    QuadResult total;
    const MetricChart& target = map.target();
    for (std::size_t li = 0; li < dom.loops().size(); ++li) {
        const BoundaryLoop& loop = dom.loops()[li];
        BoundaryImageJet jet(map, loop);

        std::vector<double> cuts;
        if (li < splits_per_loop.size())
            for (double s : splits_per_loop[li]) cuts.push_back(s);
        std::sort(cuts.begin(), cuts.end());

        // piece list over the closed parameter circle
        std::vector<std::pair<double, double>> pieces;
        if (cuts.empty()) {
            pieces.push_back({0.0, kTwoPi});
        } else {
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                pieces.push_back({cuts[i], cuts[i + 1]});
            pieces.push_back({cuts.back(), cuts.front() + kTwoPi});
        }

        for (auto [a, b] : pieces) {
            double mid = 0.5 * (a + b);
            double lam = map.lambda(loop.point(std::fmod(mid, kTwoPi)));
            double sgn = lam > 0.0 ? 1.0 : -1.0;
            double weight = sgn;
            if (comb == BoundaryCombination::Formula2Plus && sgn < 0.0) continue;
            if (comb == BoundaryCombination::Formula2Minus && sgn > 0.0) continue;
            auto f = [&](double t) { return weight * jet.curvature_density(target, t); };
            QuadResult r = integrate_curve(f, a, b, {}, abs_tol / (2.0 * pieces.size() + 2.0));
            total.value += r.value;
            total.error += r.error;
            total.evals += r.evals;
            total.budget_exceeded |= r.budget_exceeded;
        }
    }
    return total;
}

} // namespace gbmap
