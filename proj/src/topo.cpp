#include "gbmap/topo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace gbmap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vertex {
    Vec2 p;
    bool is_crossing = false;
    SignClass sign_class = SignClass::Null;
};

struct Edge {
    enum class Type { Sigma, Boundary } type = Type::Sigma;
    int from = -1, to = -1;  // -1: closed loop edge without vertices
    std::vector<Vec2> pts;   // ordered polyline
    bool closed() const { return from < 0; }
};

// one end of an edge incident to a vertex
struct EdgeEnd {
    int edge;
    bool at_from;  // true: the 'from' end
    double angle;  // direction leaving the vertex
};

struct FloodGrid {
    BBox box;
    int n = 0;
    double cx = 1.0, cy = 1.0;
    std::vector<int> comp;      // -2 barrier, -1 outside, >= 0 component id
    std::vector<int> sign;      // lambda sign per cell
    bool wrap_u = false;

    int idx(int i, int j) const { return j * n + i; }
    Vec2 center(int i, int j) const {
        return {box.xmin + (i + 0.5) * cx, box.ymin + (j + 0.5) * cy};
    }
    int cell_of(Vec2 p, const PlanarDomain& dom) const {
        Vec2 q = dom.wrap(p);
        int i = static_cast<int>((q.x - box.xmin) / cx);
        int j = static_cast<int>((q.y - box.ymin) / cy);
        if (wrap_u) i = ((i % n) + n) % n;
        if (i < 0 || i >= n || j < 0 || j >= n) return -1;
        return idx(i, j);
    }
};

FloodGrid build_flood_grid(const SurfaceMap& map, const PlanarDomain& dom,
                           const std::vector<SingularComponent>& components,
                           int resolution) {
    FloodGrid g;
    g.box = dom.bbox();
    g.n = std::max(32, resolution);
    g.cx = g.box.width() / g.n;
    g.cy = g.box.height() / g.n;
    g.wrap_u = dom.period_u().has_value();
    g.comp.assign(static_cast<std::size_t>(g.n) * g.n, -1);
    g.sign.assign(static_cast<std::size_t>(g.n) * g.n, 0);

    // barrier curves: the boundary loops plus the singular polylines
    double diag = std::hypot(g.cx, g.cy);
    SegmentGrid barriers(g.box.inflated(2 * diag), 96, 96);
    auto add_poly = [&](const std::vector<Vec2>& pts) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            auto add = [&](double shift) {
                barriers.add_segment({pts[i].x + shift, pts[i].y},
                                     {pts[i + 1].x + shift, pts[i + 1].y}, 0, 0, 0, 0);
            };
            add(0.0);
            if (g.wrap_u) {
                add(*dom.period_u());
                add(-*dom.period_u());
            }
        }
    };
    for (const auto& loop : dom.loops()) add_poly(loop.polyline().points);
    for (const auto& comp : components) {
        std::vector<Vec2> pts;
        pts.reserve(comp.samples.size());
        for (const auto& s : comp.samples) pts.push_back(s.p);
        add_poly(pts);
    }

    std::vector<const SegmentGrid::Entry*> near;
    double rr = 0.9 * diag;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            Vec2 c = g.center(i, j);
            if (!dom.contains(c)) continue;
            BBox q{c.x - rr, c.x + rr, c.y - rr, c.y + rr};
            barriers.query(q, near);
            bool barrier = false;
            for (const auto* e : near)
                if (segment_dist2(c, e->a, e->b) < rr * rr) {
                    barrier = true;
                    break;
                }
            if (barrier) {
                g.comp[static_cast<std::size_t>(g.idx(i, j))] = -2;
                continue;
            }
            double l;
            try {
                l = map.lambda(c);
            } catch (const Error&) {
                g.comp[static_cast<std::size_t>(g.idx(i, j))] = -2;
                continue;
            }
            g.comp[static_cast<std::size_t>(g.idx(i, j))] = 0;  // fillable
            g.sign[static_cast<std::size_t>(g.idx(i, j))] = l > 0 ? 1 : (l < 0 ? -1 : 0);
        }

    // flood fill 4-connected (wrapped in u for strips)
    int next_id = 0;
    std::vector<int> stack;
    std::vector<int> ids(g.comp.size(), -1);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            int c0 = g.idx(i, j);
            if (g.comp[static_cast<std::size_t>(c0)] != 0 || ids[static_cast<std::size_t>(c0)] >= 0)
                continue;
            int id = next_id++;
            stack.assign(1, c0);
            ids[static_cast<std::size_t>(c0)] = id;
            while (!stack.empty()) {
                int c = stack.back();
                stack.pop_back();
                int ci = c % g.n, cj = c / g.n;
                const int di[4] = {1, -1, 0, 0};
                const int dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int ni = ci + di[k], nj = cj + dj[k];
                    if (g.wrap_u) ni = (ni + g.n) % g.n;
                    if (ni < 0 || ni >= g.n || nj < 0 || nj >= g.n) continue;
                    int nc = g.idx(ni, nj);
                    if (g.comp[static_cast<std::size_t>(nc)] != 0 ||
                        ids[static_cast<std::size_t>(nc)] >= 0)
                        continue;
                    ids[static_cast<std::size_t>(nc)] = id;
                    stack.push_back(nc);
                }
            }
        }
    for (std::size_t k = 0; k < g.comp.size(); ++k)
        if (g.comp[k] == 0) g.comp[k] = ids[k];
    return g;
}

double end_angle(const Edge& e, bool at_from) {
    Vec2 d;
    if (at_from)
        d = e.pts[1] - e.pts[0];
    else
        d = e.pts[e.pts.size() - 2] - e.pts.back();
    return std::atan2(d.y, d.x);
}

} // namespace

int euler_characteristic(const RegionDecomposition& dec, ChiSelector sel) {
    switch (sel) {
        case ChiSelector::M: return dec.chi_M;
        case ChiSelector::ClosurePlus: return dec.chi_closure_plus;
        case ChiSelector::ClosureMinus: return dec.chi_closure_minus;
        case ChiSelector::Sigma: return dec.chi_sigma;
    }
    return 0;
}

RegionDecomposition build_decomposition(const SurfaceMap& map, const PlanarDomain& dom,
                                        const std::vector<SingularComponent>& components,
                                        const std::vector<SingularPointRecord>& records,
                                        int resolution) {
    RegionDecomposition dec;
    dec.chi_M = dom.chi();

    std::vector<Vertex> vertices;
    std::vector<Edge> edges;

    // crossing vertices, indexed by (loop, t) for the boundary splitting
    std::vector<std::vector<std::pair<double, int>>> loop_cuts(dom.loops().size());
    // per component: ordered breakpoints (arc_s, vertex id)
    struct Breaks {
        std::vector<std::pair<double, int>> at;  // sorted by arc_s
    };
    std::vector<Breaks> comp_breaks(components.size());

    for (std::size_t ci = 0; ci < components.size(); ++ci) {
        const SingularComponent& c = components[ci];
        if (c.start_crossing) {
            Vertex v;
            v.p = c.start_crossing->p;
            v.is_crossing = true;
            int id = static_cast<int>(vertices.size());
            vertices.push_back(v);
            comp_breaks[ci].at.push_back({c.samples.front().s, id});
            loop_cuts[static_cast<std::size_t>(c.start_crossing->loop)].push_back(
                {c.start_crossing->loop_t, id});
        }
        if (c.end_crossing) {
            Vertex v;
            v.p = c.end_crossing->p;
            v.is_crossing = true;
            int id = static_cast<int>(vertices.size());
            vertices.push_back(v);
            comp_breaks[ci].at.push_back({c.samples.back().s, id});
            loop_cuts[static_cast<std::size_t>(c.end_crossing->loop)].push_back(
                {c.end_crossing->loop_t, id});
        }
    }
    for (const auto& rec : records) {
        if (rec.stratum != PointStratum::InteriorSecondKind) continue;
        Vertex v;
        v.p = rec.location;
        v.sign_class = rec.sign_class;
        int id = static_cast<int>(vertices.size());
        vertices.push_back(v);
        if (rec.component >= 0 &&
            static_cast<std::size_t>(rec.component) < comp_breaks.size())
            comp_breaks[static_cast<std::size_t>(rec.component)].at.push_back(
                {rec.arc_s, id});
        switch (rec.sign_class) {
            case SignClass::Positive: ++dec.s_plus; break;
            case SignClass::Negative: ++dec.s_minus; break;
            case SignClass::Null: break;
        }
    }
    for (const auto& rec : records) {
        if (rec.stratum != PointStratum::Boundary) continue;
        switch (rec.sign_class) {
            case SignClass::Positive: ++dec.bd_plus; break;
            case SignClass::Negative: ++dec.bd_minus; break;
            case SignClass::Null: ++dec.bd_null; break;
        }
    }

    // singular edges: slice each component polyline at its breakpoints
    // (every vertex created so far lies on the singular set)
    int sigma_vertices = static_cast<int>(vertices.size());

    auto slice = [&](const SingularComponent& c, double s0, double s1, Vec2 p0, Vec2 p1) {
        std::vector<Vec2> pts;
        pts.push_back(p0);
        for (const auto& s : c.samples)
            if (s.s > s0 + 1e-12 && s.s < s1 - 1e-12) pts.push_back(s.p);
        pts.push_back(p1);
        return pts;
    };

    for (std::size_t ci = 0; ci < components.size(); ++ci) {
        const SingularComponent& c = components[ci];
        auto& brk = comp_breaks[ci].at;
        std::sort(brk.begin(), brk.end());
        if (brk.empty()) {
            // closed loop without distinguished points
            Edge e;
            e.type = Edge::Type::Sigma;
            for (const auto& s : c.samples) e.pts.push_back(s.p);
            edges.push_back(std::move(e));
            ++dec.closed_loop_edges;
            continue;
        }
        if (c.closed) {
            double total = c.samples.back().s;
            for (std::size_t k = 0; k < brk.size(); ++k) {
                auto [s0, v0] = brk[k];
                auto [s1, v1] = brk[(k + 1) % brk.size()];
                Edge e;
                e.type = Edge::Type::Sigma;
                e.from = v0;
                e.to = v1;
                if (k + 1 < brk.size()) {
                    e.pts = slice(c, s0, s1, vertices[static_cast<std::size_t>(v0)].p,
                                  vertices[static_cast<std::size_t>(v1)].p);
                } else {
                    // wrap piece through the loop seam
                    e.pts.push_back(vertices[static_cast<std::size_t>(v0)].p);
                    for (const auto& s : c.samples)
                        if (s.s > s0 + 1e-12 && s.s < total - 1e-12) e.pts.push_back(s.p);
                    for (const auto& s : c.samples)
                        if (s.s < s1 - 1e-12) e.pts.push_back(s.p);
                    e.pts.push_back(vertices[static_cast<std::size_t>(v1)].p);
                }
                if (e.pts.size() < 2) continue;
                edges.push_back(std::move(e));
            }
        } else {
            for (std::size_t k = 0; k + 1 < brk.size(); ++k) {
                auto [s0, v0] = brk[k];
                auto [s1, v1] = brk[k + 1];
                Edge e;
                e.type = Edge::Type::Sigma;
                e.from = v0;
                e.to = v1;
                e.pts = slice(c, s0, s1, vertices[static_cast<std::size_t>(v0)].p,
                              vertices[static_cast<std::size_t>(v1)].p);
                edges.push_back(std::move(e));
            }
        }
    }
    int sigma_arc_edges = 0;
    for (const auto& e : edges)
        if (e.type == Edge::Type::Sigma && !e.closed()) ++sigma_arc_edges;
    dec.chi_sigma = sigma_vertices - sigma_arc_edges;
    dec.crossings = 0;
    for (const auto& v : vertices)
        if (v.is_crossing) ++dec.crossings;

    // boundary edges: slice each loop at its crossing parameters
    for (std::size_t li = 0; li < dom.loops().size(); ++li) {
        const BoundaryLoop& loop = dom.loops()[li];
        auto& cuts = loop_cuts[li];
        if (cuts.empty()) {
            Edge e;
            e.type = Edge::Type::Boundary;
            e.pts = loop.polyline().points;
            edges.push_back(std::move(e));
            ++dec.closed_loop_edges;
            continue;
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            auto [t0, v0] = cuts[k];
            auto [t1, v1] = cuts[(k + 1) % cuts.size()];
            double span = k + 1 < cuts.size() ? t1 - t0 : t1 + kTwoPi - t0;
            Edge e;
            e.type = Edge::Type::Boundary;
            e.from = v0;
            e.to = v1;
            int m = std::max(8, static_cast<int>(256 * span / kTwoPi));
            e.pts.push_back(vertices[static_cast<std::size_t>(v0)].p);
            for (int i = 1; i < m; ++i)
                e.pts.push_back(loop.point(std::fmod(t0 + span * i / m, kTwoPi)));
            e.pts.push_back(vertices[static_cast<std::size_t>(v1)].p);
            edges.push_back(std::move(e));
        }
    }

    dec.V = static_cast<int>(vertices.size());
    dec.arc_edges = 0;
    for (const auto& e : edges)
        if (!e.closed()) ++dec.arc_edges;

    // vertex degree invariants
    {
        std::vector<int> degree(vertices.size(), 0);
        for (const auto& e : edges) {
            if (e.closed()) continue;
            ++degree[static_cast<std::size_t>(e.from)];
            ++degree[static_cast<std::size_t>(e.to)];
        }
        for (std::size_t vi = 0; vi < vertices.size(); ++vi) {
            int expect = vertices[vi].is_crossing ? 3 : 2;
            if (degree[vi] != expect)
                throw TopologyError("vertex degree " + std::to_string(degree[vi]) +
                                    " does not match its stratum (expected " +
                                    std::to_string(expect) + ")");
        }
    }

    // rotation system: edge ends ordered counterclockwise around each vertex
    std::vector<std::vector<EdgeEnd>> fans(vertices.size());
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
        const Edge& e = edges[ei];
        if (e.closed()) continue;
        fans[static_cast<std::size_t>(e.from)].push_back(
            {static_cast<int>(ei), true, end_angle(e, true)});
        fans[static_cast<std::size_t>(e.to)].push_back(
            {static_cast<int>(ei), false, end_angle(e, false)});
    }
    for (auto& fan : fans)
        std::sort(fan.begin(), fan.end(),
                  [](const EdgeEnd& a, const EdgeEnd& b) { return a.angle < b.angle; });

    // face circuits: follow half-edges keeping the face on the left; at the
    // head vertex continue along the counterclockwise predecessor of the
    // arrival slot
    struct Half {
        int edge;
        bool forward;
    };
    auto half_index = [&](int edge, bool forward) { return 2 * edge + (forward ? 0 : 1); };
    std::vector<char> visited(2 * edges.size(), 0);
    struct Circuit {
        std::vector<Half> halves;
    };
    std::vector<Circuit> circuits;

    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
        for (bool fwd : {true, false}) {
            if (visited[static_cast<std::size_t>(half_index(static_cast<int>(ei), fwd))])
                continue;
            Circuit circ;
            if (edges[ei].closed()) {
                visited[static_cast<std::size_t>(half_index(static_cast<int>(ei), fwd))] = 1;
                circ.halves.push_back({static_cast<int>(ei), fwd});
            } else {
                int cur_edge = static_cast<int>(ei);
                bool cur_fwd = fwd;
                for (int guard = 0; guard < 100000; ++guard) {
                    int hidx = half_index(cur_edge, cur_fwd);
                    if (visited[static_cast<std::size_t>(hidx)]) break;
                    visited[static_cast<std::size_t>(hidx)] = 1;
                    circ.halves.push_back({cur_edge, cur_fwd});
                    const Edge& e = edges[static_cast<std::size_t>(cur_edge)];
                    int head = cur_fwd ? e.to : e.from;
                    const auto& fan = fans[static_cast<std::size_t>(head)];
                    // arrival slot: this edge's end at `head`
                    std::size_t slot = 0;
                    for (std::size_t k = 0; k < fan.size(); ++k)
                        if (fan[k].edge == cur_edge && fan[k].at_from == !cur_fwd) slot = k;
                    const EdgeEnd& next = fan[(slot + fan.size() - 1) % fan.size()];
                    cur_edge = next.edge;
                    cur_fwd = next.at_from;
                }
            }
            circuits.push_back(std::move(circ));
        }
    }

    // assign circuits to flood-fill regions
    FloodGrid grid = build_flood_grid(map, dom, components, resolution);
    int nregions = 0;
    for (int id : grid.comp) nregions = std::max(nregions, id + 1);
    if (nregions == 0)
        throw TopologyError("region flood fill found no interior cells; "
                            "increase the resolution");

    // region signs with consistency check
    std::vector<int> region_sign(static_cast<std::size_t>(nregions), 0);
    for (std::size_t k = 0; k < grid.comp.size(); ++k) {
        int id = grid.comp[k];
        if (id < 0) continue;
        int s = grid.sign[k];
        if (s == 0) continue;
        int& rs = region_sign[static_cast<std::size_t>(id)];
        if (rs == 0) rs = s;
        else if (rs != s)
            throw TopologyError("a face samples both signs of lambda; "
                                "the grid resolution is too coarse");
    }

    // probe each circuit just to its left; the offsets are in units of the
    // flood-grid diagonal so they clear the barrier band
    double diag = std::hypot(grid.cx, grid.cy);
    auto left_probe = [&](const Edge& e, bool forward, double eps) {
        std::size_t best = 0;
        double best_len = -1.0;
        for (std::size_t i = 0; i + 1 < e.pts.size(); ++i) {
            double len = (e.pts[i + 1] - e.pts[i]).norm2();
            if (len > best_len) {
                best_len = len;
                best = i;
            }
        }
        Vec2 a = e.pts[best], b = e.pts[best + 1];
        Vec2 t = (b - a).normalized();
        if (!forward) t = -t;
        return (a + b) * 0.5 + t.perp() * eps;
    };

    // march each circuit's left normal outward and take the first free cell;
    // the barrier band is at least one cell thick, so the first free cell
    // reached belongs to the adjacent region even when the face is thin
    std::vector<int> region_circuits(static_cast<std::size_t>(nregions), 0);
    for (const auto& circ : circuits) {
        int found = -1;
        for (std::size_t hk = 0; hk < circ.halves.size() && found < 0; ++hk) {
            const Edge& e = edges[static_cast<std::size_t>(circ.halves[hk].edge)];
            bool left_in_M = true;
            for (int step = 1; step <= 24; ++step) {
                Vec2 probe = left_probe(e, circ.halves[hk].forward, 0.3 * step * diag);
                if (!dom.contains(probe)) {
                    if (step <= 3) left_in_M = false;  // outside circuit
                    break;
                }
                int cell = grid.cell_of(probe, dom);
                if (cell < 0) break;
                int id = grid.comp[static_cast<std::size_t>(cell)];
                if (id >= 0) {
                    found = id;
                    break;
                }
            }
            if (!left_in_M) break;  // bounds the outside of the domain
        }
        if (found >= 0) ++region_circuits[static_cast<std::size_t>(found)];
    }

    dec.F = nregions;
    for (int r = 0; r < nregions; ++r) {
        FaceInfo f;
        f.sign = region_sign[static_cast<std::size_t>(r)];
        f.circuits = region_circuits[static_cast<std::size_t>(r)];
        if (f.circuits == 0)
            throw TopologyError("a region received no boundary circuit; "
                                "increase the resolution");
        dec.faces.push_back(f);
        if (f.sign > 0) dec.chi_closure_plus += f.chi();
        else if (f.sign < 0) dec.chi_closure_minus += f.chi();
        dec.cut_edges += f.circuits - 1;
    }
    dec.E = dec.arc_edges + dec.cut_edges;

    if (dec.V - dec.E + dec.F != dec.chi_M)
        throw TopologyError("V - E + F = " + std::to_string(dec.V - dec.E + dec.F) +
                            " does not match chi(M) = " + std::to_string(dec.chi_M));
    return dec;
}

// ---------------------------------------------------------------------------
// rotation index

int rotation_index(std::span<const Vec2> tangents) {
    if (tangents.size() < 3) throw TopologyError("too few tangent samples");
    double total = 0.0;
    for (std::size_t i = 0; i < tangents.size(); ++i) {
        Vec2 a = tangents[i];
        Vec2 b = tangents[(i + 1) % tangents.size()];
        if (a.norm() < 1e-13 || b.norm() < 1e-13)
            throw TopologyError("vanishing tangent in rotation index");
        total += std::atan2(a.cross(b), a.dot(b));
    }
    double turns = total / kTwoPi;
    double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 0.05)
        throw TopologyError("accumulated turning " + std::to_string(turns) +
                            " is not close to an integer");
    return static_cast<int>(rounded);
}

// ---------------------------------------------------------------------------
// mapping degree

namespace {

void check_boundary_compatibility(const SurfaceMap& map, const PlanarDomain& dom,
                                  const TargetDomain& target) {
    for (const auto& loop : dom.loops()) {
        for (int k = 0; k < 256; ++k) {
            double t = kTwoPi * k / 256.0;
            Vec2 q = map(loop.point(t));
            double d = std::min(std::abs(q.y - target.y0), std::abs(q.y - target.y1));
            if (d > 1e-7)
                throw HypothesisError("f(dM) leaves dN: image y = " + std::to_string(q.y));
            // transversality of f to dN along dM: d(y o f) must not vanish
            Mat2 J = map.jacobian(loop.point(t));
            Vec2 grad_y{J.c, J.d};
            if (grad_y.norm() < 1e-6)
                throw HypothesisError("f is not transverse to dN along dM");
        }
    }
    // no interior point may touch dN
    const BBox& box = dom.bbox();
    int n = 64;
    double margin = 0.02 * std::max(box.width(), box.height());
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            Vec2 p{box.xmin + box.width() * i / n, box.ymin + box.height() * j / n};
            if (!dom.contains(p)) continue;
            if (dom.nearest_boundary_dist2(p) < margin * margin) continue;
            Vec2 q = map(p);
            if (q.y <= target.y0 + 1e-9 || q.y >= target.y1 - 1e-9)
                throw HypothesisError("an interior point maps onto dN (f^-1(dN) != dM)");
        }
}

struct PreimageSearch {
    const SurfaceMap& map;
    const PlanarDomain& dom;
    double period;

    Vec2 wrapped_target_diff(Vec2 a, Vec2 b) const {
        Vec2 d = a - b;
        if (map.target().period_x()) d.x = std::remainder(d.x, *map.target().period_x());
        return d;
    }

    std::vector<Vec2> find(Vec2 q) const {
        const BBox& box = dom.bbox();
        std::vector<Vec2> found;
        int n = 40;
        double scale = std::max(box.width(), box.height());
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                Vec2 p{box.xmin + box.width() * i / n, box.ymin + box.height() * j / n};
                bool ok = false;
                for (int it = 0; it < 40; ++it) {
                    Vec2 r = wrapped_target_diff(map(p), q);
                    if (r.norm() < 1e-11) {
                        ok = true;
                        break;
                    }
                    Mat2 J = map.jacobian(p);
                    if (std::abs(J.det()) < 1e-13) break;
                    Vec2 step = J.solve(r);
                    double sn = step.norm();
                    if (sn > 0.25 * scale) step = step * (0.25 * scale / sn);
                    p -= step;
                    if (std::abs(p.x - box.xmin) > 4 * box.width() ||
                        std::abs(p.y - box.ymin) > 4 * box.height())
                        break;
                }
                if (!ok) continue;
                p = dom.wrap(p);
                if (!dom.contains(p)) continue;
                bool dup = false;
                for (const Vec2& f : found)
                    if (dom.wrapped_diff(f, p).norm() < 1e-6) dup = true;
                if (!dup) found.push_back(p);
            }
        return found;
    }
};

} // namespace

DegreeResult mapping_degree(const SurfaceMap& map, const PlanarDomain& dom,
                            const std::vector<SingularComponent>& components,
                            const TargetDomain& target) {
    if (!map.target().period_x())
        throw HypothesisError("degree computation expects an x-periodic target chart");
    double P = *map.target().period_x();
    check_boundary_compatibility(map, dom, target);

    // image samples of the singular set, to keep regular values away from it
    std::vector<Vec2> fsigma;
    for (const auto& comp : components)
        for (std::size_t i = 0; i < comp.samples.size(); i += 2)
            fsigma.push_back(map.target().wrap(map(comp.samples[i].p)));

    auto score = [&](Vec2 q) {
        double best = std::min(q.y - target.y0, target.y1 - q.y);
        for (const Vec2& s : fsigma) {
            Vec2 d = map.target().wrapped_diff(q, s);
            best = std::min(best, d.norm());
        }
        return best;
    };

    std::vector<Vec2> candidates;
    for (int i = 0; i < 48; ++i)
        for (int j = 1; j < 24; ++j)
            candidates.push_back({P * i / 48.0, target.y0 + target.width() * j / 24.0});
    std::sort(candidates.begin(), candidates.end(),
              [&](Vec2 a, Vec2 b) { return score(a) > score(b); });

    PreimageSearch search{map, dom, P};

    auto degree_at = [&](Vec2 q, std::vector<Vec2>& pre) -> std::optional<int> {
        pre = search.find(q);
        int deg = 0;
        for (const Vec2& p : pre) {
            double l = map.lambda(p);
            if (std::abs(l) < 1e-8) return std::nullopt;  // too close to critical
            deg += l > 0 ? 1 : -1;
        }
        return deg;
    };

    DegreeResult out;
    std::optional<int> d1;
    std::size_t ci = 0;
    for (; ci < candidates.size() && ci < 10; ++ci) {
        d1 = degree_at(candidates[ci], out.preimages1);
        if (d1) {
            out.regular_value1 = candidates[ci];
            break;
        }
    }
    if (!d1) throw HypothesisError("no regular value found clear of the critical set");

    std::optional<int> d2;
    for (std::size_t cj = ci + 1; cj < candidates.size(); ++cj) {
        Vec2 q = candidates[cj];
        Vec2 dq = map.target().wrapped_diff(q, out.regular_value1);
        if (dq.norm() < 0.2 * std::min(P, target.width())) continue;
        d2 = degree_at(q, out.preimages2);
        if (d2) {
            out.regular_value2 = q;
            break;
        }
    }
    if (!d2) throw HypothesisError("no second regular value found");

    if (*d1 != *d2)
        throw HypothesisError("degree mismatch between regular values: " +
                              std::to_string(*d1) + " vs " + std::to_string(*d2));
    out.degree = *d1;
    return out;
}

std::optional<double> degree_from_curvature_ratio(const SurfaceMap& map,
                                                  const PlanarDomain& dom,
                                                  const std::vector<Polyline>& sigma,
                                                  const TargetDomain& target) {
    const MetricChart& chart = map.target();
    if (chart.is_flat() || !chart.period_x()) return std::nullopt;
    double P = *chart.period_x();
    auto f = [&](Vec2 q) { return chart.gaussian_curvature(q) * chart.area_density(q); };
    QuadResult kn = integrate_rect(f, {0.0, P, target.y0, target.y1}, 1e-9);
    if (std::abs(kn.value) < 1e-6) return std::nullopt;  // ratio unusable
    QuadResult km = integrate_region(map, dom, RegionMode::Signed, 1e-8, sigma);
    return km.value / kn.value;
}

} // namespace gbmap
