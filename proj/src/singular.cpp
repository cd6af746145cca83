#include "gbmap/singular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace gbmap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

double lambda_guarded(const SurfaceMap& map, Vec2 p) {
    try {
        return map.lambda(p);
    } catch (const ChartExitError&) {
        return std::numeric_limits<double>::quiet_NaN();
    } catch (const EvalDomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Full 2-D Newton step onto lambda = 0 along the gradient.
bool newton_refine(const SurfaceMap& map, Vec2& p, double tol) {
    for (int it = 0; it < 25; ++it) {
        double l = map.lambda(p);
        Vec2 g = map.dlambda(p);
        double g2 = g.norm2();
        if (g2 < 1e-24) return false;
        Vec2 step = g * (l / g2);
        p -= step;
        if (std::abs(l) < tol && step.norm() < 1e-13) return true;
    }
    return std::abs(map.lambda(p)) < tol;
}

struct SeedSet {
    double cell = 1.0;
    Vec2 origin;
    std::unordered_map<long long, std::vector<int>> buckets;
    std::vector<Vec2> points;
    std::vector<bool> used;

    long long key(Vec2 p) const {
        long long ix = static_cast<long long>(std::floor((p.x - origin.x) / cell));
        long long iy = static_cast<long long>(std::floor((p.y - origin.y) / cell));
        return ix * 2000003LL + iy;
    }
    void add(Vec2 p, const PlanarDomain& dom) {
        p = dom.wrap(p);
        points.push_back(p);
        used.push_back(false);
        buckets[key(p)].push_back(static_cast<int>(points.size()) - 1);
    }
    // marched points arrive in unwrapped coordinates; wrap every bucket
    // probe so consumption works across the periodic seam
    void consume_near(Vec2 p, double radius, const PlanarDomain& dom) {
        Vec2 pw = dom.wrap(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                Vec2 shifted = dom.wrap({pw.x + dx * cell, pw.y + dy * cell});
                auto it = buckets.find(key(shifted));
                if (it == buckets.end()) continue;
                for (int idx : it->second)
                    if (!used[idx] &&
                        dom.wrapped_diff(points[idx], pw).norm() < radius)
                        used[idx] = true;
            }
    }
};

} // namespace

double domain_distance(const PlanarDomain& dom, Vec2 a, Vec2 b) {
    return dom.wrapped_diff(a, b).norm();
}

// ---------------------------------------------------------------------------
// tracing

namespace {

struct Tracer {
    const SurfaceMap& map;
    const PlanarDomain& dom;
    const TraceOptions& opts;
    double h;             // seed grid pitch
    SeedSet* seeds = nullptr;

    Vec2 unit_tangent(Vec2 p) const {
        Vec2 w = map.sing_tangent(p);
        double n = w.norm();
        if (n < opts.dlambda_floor)
            throw DegeneracyError("dlambda below the non-degeneracy floor at (" +
                                  std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        return w / n;
    }

    BoundaryCrossing solve_crossing(Vec2 inside, Vec2 outside) const {
        Vec2 mid = (inside + outside) * 0.5;
        auto [loop_idx, t_near] = dom.nearest_boundary(mid);
        const BoundaryLoop& loop = dom.loops()[static_cast<std::size_t>(loop_idx)];
        auto g = [&](double t) { return lambda_guarded(map, loop.point(t)); };
        // bracket the sign change of lambda along the loop around t_near,
        // expanding symmetrically one sample at a time
        double dt = kTwoPi / 2048.0;
        double ta = 0.0, tb = 0.0, ga = 0.0;
        bool bracketed = false;
        double prev_fwd = g(t_near), prev_bwd = prev_fwd;
        for (int k = 1; k <= 80 && !bracketed; ++k) {
            double tf = t_near + k * dt, gf = g(tf);
            if (std::isfinite(prev_fwd) && std::isfinite(gf) && prev_fwd * gf <= 0.0) {
                ta = tf - dt;
                tb = tf;
                ga = prev_fwd;
                bracketed = true;
                break;
            }
            prev_fwd = gf;
            double tbk = t_near - k * dt, gb2 = g(tbk);
            if (std::isfinite(prev_bwd) && std::isfinite(gb2) && prev_bwd * gb2 <= 0.0) {
                ta = tbk;
                tb = tbk + dt;
                ga = gb2;
                bracketed = true;
                break;
            }
            prev_bwd = gb2;
        }
        if (!bracketed) {
            // rescan the whole loop once; the crossing may sit far from the
            // nearest-vertex guess on strongly curved boundaries
            double prev_t = 0.0, prev_g = g(0.0);
            for (int i = 1; i <= 2048 && !bracketed; ++i) {
                double t = kTwoPi * i / 2048.0;
                double cur = g(t);
                if (std::isfinite(prev_g) && std::isfinite(cur) && prev_g * cur <= 0.0 &&
                    std::abs(std::remainder(t - t_near, kTwoPi)) < 0.3) {
                    ta = prev_t;
                    tb = t;
                    ga = prev_g;
                    bracketed = true;
                }
                prev_t = t;
                prev_g = cur;
            }
        }
        if (!bracketed)
            throw TraceError("failed to bracket a boundary crossing of the singular set");
        for (int it = 0; it < 80; ++it) {
            double tm = 0.5 * (ta + tb);
            double gm = g(tm);
            if (ga * gm <= 0.0) {
                tb = tm;
            } else {
                ta = tm;
                ga = gm;
            }
        }
        BoundaryCrossing c;
        c.loop = loop_idx;
        c.loop_t = std::fmod(0.5 * (ta + tb) + kTwoPi, kTwoPi);
        c.p = loop.point(c.loop_t);
        (void)inside;
        (void)outside;
        return c;
    }

    // March from p0 in direction sign*W. Returns the polyline (p0 excluded)
    // plus a crossing record if the march left the domain, and whether the
    // march closed back onto `closure_target`.
    struct March {
        std::vector<Vec2> pts;
        std::optional<BoundaryCrossing> crossing;
        bool closed = false;
    };

    March march(Vec2 p0, double dir, Vec2 closure_target, bool allow_closure) const {
        March out;
        Vec2 p = p0;
        double step = 0.5 * h;
        double travelled = 0.0;
        for (int n = 0; n < opts.max_steps; ++n) {
            Vec2 t = unit_tangent(p) * dir;
            double s = step;
            Vec2 cand;
            bool ok = false;
            for (int half = 0; half < 14; ++half) {
                cand = p + t * s;
                Vec2 refined = cand;
                bool conv = false;
                try {
                    conv = newton_refine(map, refined, opts.lambda_tol);
                } catch (const ChartExitError&) {
                    conv = false;
                } catch (const EvalDomainError&) {
                    conv = false;
                }
                if (conv && (refined - cand).norm() < 0.4 * s &&
                    (unit_tangent(refined) * dir).dot(t) > 0.2) {
                    cand = refined;
                    ok = true;
                    break;
                }
                s *= 0.5;
            }
            if (!ok)
                throw TraceError("singular-set continuation stalled near (" +
                                 std::to_string(p.x) + ", " + std::to_string(p.y) + ")");

            if (!dom.contains(cand)) {
                out.crossing = solve_crossing(p, cand);
                return out;
            }
            out.pts.push_back(cand);
            travelled += (cand - p).norm();
            p = cand;
            if (seeds) seeds->consume_near(p, 0.9 * h, dom);
            if (allow_closure && travelled > 3.0 * h &&
                dom.wrapped_diff(p, closure_target).norm() < 0.9 * s) {
                out.closed = true;
                return out;
            }
            if (s == step && step < 0.5 * h) step = std::min(0.5 * h, step * 1.6);
            else step = s;
        }
        throw TraceError("singular-set continuation exceeded the step budget");
    }
};

void fill_samples(const SurfaceMap& map, SingularComponent& comp,
                  const TraceOptions& opts, std::vector<Vec2> pts) {
    comp.samples.clear();
    comp.samples.reserve(pts.size());
    double s = 0.0;
    Vec2 prev_eta;
    bool have_prev = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += (pts[i] - pts[i - 1]).norm();
        SingularSample smp;
        smp.p = pts[i];
        smp.s = s;
        Vec2 w = map.sing_tangent(pts[i]);
        double wn = w.norm();
        if (wn < opts.dlambda_floor)
            throw DegeneracyError("dlambda below the non-degeneracy floor on a traced arc");
        smp.tangent = w / wn;
        Vec2 eta;
        try {
            eta = map.null_direction(pts[i]);
        } catch (const RankError& e) {
            throw DegeneracyError(std::string("rank defect on the singular set: ") + e.what());
        }
        if (have_prev && prev_eta.dot(eta) < 0.0) eta = -eta;
        prev_eta = eta;
        have_prev = true;
        smp.eta = eta;
        smp.delta = smp.tangent.cross(eta);
        smp.first_kind = std::abs(smp.delta) > 1e-4;
        comp.samples.push_back(smp);
    }
}

} // namespace

TraceResult trace_singular_set(const SurfaceMap& map, const PlanarDomain& dom,
                               const TraceOptions& opts) {
    TraceResult result;
    const BBox& box = dom.bbox();
    int n = std::max(8, opts.resolution);
    double hx = box.width() / n, hy = box.height() / n;
    double h = std::max(hx, hy);

    // lambda on the seed grid (NaN where the chart or expressions fail)
    std::vector<double> grid(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            grid[static_cast<std::size_t>(j) * (n + 1) + i] =
                lambda_guarded(map, {box.xmin + i * hx, box.ymin + j * hy});

    SeedSet seeds;
    seeds.cell = 2.0 * h;
    seeds.origin = {box.xmin, box.ymin};
    auto try_seed = [&](Vec2 a, double la, Vec2 b, double lb) {
        if (!std::isfinite(la) || !std::isfinite(lb) || la * lb > 0.0) return;
        if (la == 0.0 && lb == 0.0) return;
        double t = la == lb ? 0.5 : la / (la - lb);
        Vec2 p = a + (b - a) * std::clamp(t, 0.0, 1.0);
        // only keep seeds near the closed domain
        if (!dom.contains(p) && dom.nearest_boundary_dist2(p) > (2 * h) * (2 * h)) return;
        seeds.add(p, dom);
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            double l = grid[static_cast<std::size_t>(j) * (n + 1) + i];
            Vec2 p{box.xmin + i * hx, box.ymin + j * hy};
            if (i < n)
                try_seed(p, l, {box.xmin + (i + 1) * hx, box.ymin + j * hy},
                         grid[static_cast<std::size_t>(j) * (n + 1) + i + 1]);
            if (j < n)
                try_seed(p, l, {box.xmin + i * hx, box.ymin + (j + 1) * hy},
                         grid[static_cast<std::size_t>(j + 1) * (n + 1) + i]);
        }

    Tracer tracer{map, dom, opts, h, &seeds};

    for (std::size_t si = 0; si < seeds.points.size(); ++si) {
        if (seeds.used[si]) continue;
        seeds.used[si] = true;
        Vec2 p0 = seeds.points[si];
        bool refined;
        try {
            refined = newton_refine(map, p0, opts.lambda_tol);
        } catch (const Error&) {
            continue;  // seed fell off the chart while refining
        }
        if (!refined) continue;
        if (!dom.contains(p0)) {
            // seed belongs to a piece of the zero set outside M (it may
            // still cross into M elsewhere; other seeds cover that)
            if (dom.nearest_boundary_dist2(p0) > (0.5 * h) * (0.5 * h)) continue;
            // sits essentially on the boundary: walk along the curve to an
            // interior point, otherwise the arc only touches M from outside
            bool entered = false;
            for (double dir : {1.0, -1.0}) {
                Vec2 q = p0;
                for (int k = 0; k < 4 && !entered; ++k) {
                    Vec2 w = map.sing_tangent(q);
                    double wn = w.norm();
                    if (wn < opts.dlambda_floor) break;
                    q += w * (dir * 0.35 * h / wn);
                    if (!newton_refine(map, q, opts.lambda_tol)) break;
                    if (dom.contains(q) &&
                        dom.nearest_boundary_dist2(q) > (0.3 * h) * (0.3 * h)) {
                        entered = true;
                        p0 = q;
                    }
                }
                if (entered) break;
            }
            if (!entered) continue;
        }
        seeds.consume_near(p0, 0.9 * h, dom);

        Tracer::March fwd = tracer.march(p0, +1.0, p0, true);
        SingularComponent comp;
        std::vector<Vec2> pts;
        if (fwd.closed) {
            comp.closed = true;
            pts.push_back(p0);
            pts.insert(pts.end(), fwd.pts.begin(), fwd.pts.end());
            // explicit wrap duplicate, in unwrapped coordinates for loops
            // that wind around a periodic domain
            Vec2 dup = p0;
            if (dom.period_u())
                dup.x += std::round((pts.back().x - p0.x) / *dom.period_u()) *
                         *dom.period_u();
            pts.push_back(dup);
        } else {
            Tracer::March bwd = tracer.march(p0, -1.0, p0, false);
            // backward points run against W; reverse them so the whole
            // polyline is ordered along the singular tangent field
            pts.assign(bwd.pts.rbegin(), bwd.pts.rend());
            pts.push_back(p0);
            pts.insert(pts.end(), fwd.pts.begin(), fwd.pts.end());
            if (bwd.crossing) {
                comp.start_crossing = bwd.crossing;
                pts.insert(pts.begin(), bwd.crossing->p);
                // seeds just outside the boundary belong to this component
                seeds.consume_near(bwd.crossing->p, 2.0 * h, dom);
            }
            if (fwd.crossing) {
                comp.end_crossing = fwd.crossing;
                pts.push_back(fwd.crossing->p);
                seeds.consume_near(fwd.crossing->p, 2.0 * h, dom);
            }
            if (!bwd.crossing && !fwd.crossing)
                throw TraceError("open singular arc terminated inside the domain");
        }
        if (pts.size() < 2) continue;
        // drop outside stubs: both crossings at essentially the same spot
        if (comp.start_crossing && comp.end_crossing) {
            double len = 0.0;
            for (std::size_t k = 0; k + 1 < pts.size(); ++k)
                len += (pts[k + 1] - pts[k]).norm();
            if (comp.start_crossing->loop == comp.end_crossing->loop &&
                std::abs(std::remainder(comp.start_crossing->loop_t -
                                            comp.end_crossing->loop_t, kTwoPi)) < 1e-9 &&
                len < 0.5 * h)
                continue;
        }
        fill_samples(map, comp, opts, std::move(pts));
        // fix up the wrap duplicate of closed loops: continue eta smoothly
        if (comp.closed && comp.samples.size() >= 2) {
            auto& last = comp.samples.back();
            const auto& prev = comp.samples[comp.samples.size() - 2];
            if (prev.eta.dot(last.eta) < 0.0) {
                last.eta = -last.eta;
                last.delta = last.tangent.cross(last.eta);
            }
        }
        result.components.push_back(std::move(comp));
    }

    // merge-ambiguity warning: distinct components closer than half a cell
    for (std::size_t a = 0; a < result.components.size(); ++a)
        for (std::size_t b = a + 1; b < result.components.size(); ++b) {
            double dmin = std::numeric_limits<double>::max();
            for (std::size_t i = 0; i < result.components[a].samples.size(); i += 4)
                for (std::size_t j = 0; j < result.components[b].samples.size(); j += 4)
                    dmin = std::min(dmin, domain_distance(dom,
                                                          result.components[a].samples[i].p,
                                                          result.components[b].samples[j].p));
            if (dmin < 0.5 * h)
                result.warnings.push_back(
                    "components " + std::to_string(a) + " and " + std::to_string(b) +
                    " approach within half a grid cell; consider a finer resolution");
        }
    return result;
}

// ---------------------------------------------------------------------------
// kind classification

namespace {

// delta = det(T, eta) at an arbitrary point of the singular set, with eta
// aligned to a reference direction for sign continuity.
double delta_at(const SurfaceMap& map, Vec2 q, Vec2 eta_ref) {
    Vec2 w = map.sing_tangent(q);
    Vec2 t = w / w.norm();
    Vec2 eta = map.null_direction(q);
    if (eta.dot(eta_ref) < 0.0) eta = -eta;
    return t.cross(eta);
}

Vec2 project_between(const SurfaceMap& map, Vec2 a, Vec2 b, double s) {
    Vec2 q = a + (b - a) * s;
    newton_refine(map, q, 1e-12);
    return q;
}

// least-squares polynomial fit of degree `deg` through (x_i, y_i)
std::vector<double> polyfit(const std::vector<double>& xs, const std::vector<double>& ys,
                            int deg) {
    int m = deg + 1;
    std::vector<double> ata(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> atb(m, 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        double powi = 1.0;
        std::vector<double> basis(m);
        for (int i = 0; i < m; ++i) {
            basis[i] = powi;
            powi *= xs[k];
        }
        for (int i = 0; i < m; ++i) {
            atb[i] += basis[i] * ys[k];
            for (int j = 0; j < m; ++j) ata[static_cast<std::size_t>(i) * m + j] += basis[i] * basis[j];
        }
    }
    // Gaussian elimination with partial pivoting
    std::vector<double> c = atb;
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(ata[static_cast<std::size_t>(r) * m + col]) >
                std::abs(ata[static_cast<std::size_t>(piv) * m + col]))
                piv = r;
        for (int j = 0; j < m; ++j)
            std::swap(ata[static_cast<std::size_t>(col) * m + j],
                      ata[static_cast<std::size_t>(piv) * m + j]);
        std::swap(c[col], c[piv]);
        double d = ata[static_cast<std::size_t>(col) * m + col];
        if (std::abs(d) < 1e-300) continue;
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = ata[static_cast<std::size_t>(r) * m + col] / d;
            for (int j = 0; j < m; ++j)
                ata[static_cast<std::size_t>(r) * m + j] -=
                    f * ata[static_cast<std::size_t>(col) * m + j];
            c[r] -= f * c[col];
        }
    }
    for (int i = 0; i < m; ++i) {
        double d = ata[static_cast<std::size_t>(i) * m + i];
        c[i] = std::abs(d) > 1e-300 ? c[i] / d : 0.0;
    }
    return c;
}

int admissible_order(const SurfaceMap& map, const SingularComponent& comp,
                     std::size_t root_lo, Vec2 root, double root_s) {
    // window of samples around the root, scaled to [-1, 1]
    const auto& smp = comp.samples;
    std::size_t lo = root_lo > 12 ? root_lo - 12 : 0;
    std::size_t hi = std::min(smp.size() - 1, root_lo + 13);
    double w = std::max(root_s - smp[lo].s, smp[hi].s - root_s);
    if (w <= 0.0) throw AdmissibilityError("degenerate fit window at a second-kind point");
    std::vector<double> xs, ys;
    double scale = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        xs.push_back((smp[i].s - root_s) / w);
        ys.push_back(smp[i].delta);
        scale = std::max(scale, std::abs(smp[i].delta));
    }
    (void)root;
    if (scale < 1e-12)
        throw AdmissibilityError("delta vanishes on a whole parameter window (non-admissible)");
    auto coef = polyfit(xs, ys, 4);
    double cmax = 0.0;
    for (double c : coef) cmax = std::max(cmax, std::abs(c));
    double floor_sig = std::max(0.02 * cmax, 1e-6 * scale);
    for (int j = 1; j <= 4; ++j)
        if (std::abs(coef[static_cast<std::size_t>(j)]) > floor_sig) return j - 1;
    throw AdmissibilityError("no finite-order zero of delta found (fit degree 4)");
}

} // namespace

std::vector<SingularPointRecord> classify_kind(const SurfaceMap& map,
                                               SingularComponent& comp,
                                               int component_index) {
    std::vector<SingularPointRecord> records;
    auto& smp = comp.samples;
    if (smp.size() < 2) return records;

    // consecutive long runs of numerically zero delta mean delta vanishes
    // identically (non-admissible)
    int zero_run = 0;
    for (const auto& s : smp) {
        if (std::abs(s.delta) < 1e-9) {
            if (++zero_run > 6)
                throw AdmissibilityError("delta vanishes along a parameter interval");
        } else {
            zero_run = 0;
        }
    }

    // samples sitting numerically on a zero of delta are roots themselves
    for (std::size_t i = 1; i + 1 < smp.size(); ++i) {
        if (std::abs(smp[i].delta) > 1e-12) continue;
        if (std::abs(smp[i - 1].delta) <= 1e-12 || std::abs(smp[i + 1].delta) <= 1e-12)
            continue;  // plateau handled by the zero-run check above
        SingularPointRecord rec;
        rec.location = smp[i].p;
        rec.stratum = PointStratum::InteriorSecondKind;
        rec.component = component_index;
        rec.arc_s = smp[i].s;
        rec.admissible_order = admissible_order(map, comp, i, smp[i].p, smp[i].s);
        records.push_back(rec);
    }

    for (std::size_t i = 0; i + 1 < smp.size(); ++i) {
        double d0 = smp[i].delta, d1 = smp[i + 1].delta;
        bool bracket = d0 * d1 < 0.0 && std::abs(d0) > 1e-12 && std::abs(d1) > 1e-12;
        if (!bracket) continue;
        // bisection on the projected chord
        Vec2 a = smp[i].p, b = smp[i + 1].p;
        Vec2 eta_ref = smp[i].eta;
        double lo = 0.0, hi = 1.0;
        double dlo = d0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            double dm = delta_at(map, project_between(map, a, b, mid), eta_ref);
            if (dlo * dm <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                dlo = dm;
            }
        }
        double s_frac = 0.5 * (lo + hi);
        Vec2 root = project_between(map, a, b, s_frac);
        double root_s = smp[i].s + (smp[i + 1].s - smp[i].s) * s_frac;

        SingularPointRecord rec;
        rec.location = root;
        rec.stratum = PointStratum::InteriorSecondKind;
        rec.component = component_index;
        rec.arc_s = root_s;
        rec.admissible_order = admissible_order(map, comp, i, root, root_s);
        records.push_back(rec);
    }

    // even-order contacts: local minima of |delta| below threshold without a
    // sign change
    for (std::size_t i = 1; i + 1 < smp.size(); ++i) {
        double dm = std::abs(smp[i].delta);
        if (dm > 1e-5) continue;
        if (dm >= std::abs(smp[i - 1].delta) || dm > std::abs(smp[i + 1].delta)) continue;
        if (smp[i - 1].delta * smp[i + 1].delta < 0.0) continue;  // handled above
        // parabolic vertex estimate
        double s0 = smp[i - 1].s, s1 = smp[i].s, s2 = smp[i + 1].s;
        double y0 = smp[i - 1].delta, y1 = smp[i].delta, y2 = smp[i + 1].delta;
        double denom = (s0 - s1) * (s0 - s2) * (s1 - s2);
        if (std::abs(denom) < 1e-30) continue;
        double aa = (s2 * (y1 - y0) + s1 * (y0 - y2) + s0 * (y2 - y1)) / denom;
        double bb = (s2 * s2 * (y0 - y1) + s1 * s1 * (y2 - y0) + s0 * s0 * (y1 - y2)) / denom;
        if (std::abs(aa) < 1e-30) continue;
        double sv = -bb / (2 * aa);
        if (sv < s0 || sv > s2) continue;
        double cc = y1 - aa * s1 * s1 - bb * s1;
        double dv = cc - bb * bb / (4 * aa);  // parabola value at the vertex
        if (std::abs(dv) > 1e-8) continue;
        double frac = (sv - s1) / std::max(1e-300, s2 - s1);
        Vec2 root = project_between(map, smp[i].p, smp[i + 1].p, std::clamp(frac, -1.0, 1.0));
        SingularPointRecord rec;
        rec.location = root;
        rec.stratum = PointStratum::InteriorSecondKind;
        rec.component = component_index;
        rec.arc_s = sv;
        rec.admissible_order = admissible_order(map, comp, i, root, sv);
        records.push_back(rec);
    }

    std::sort(records.begin(), records.end(),
              [](const SingularPointRecord& x, const SingularPointRecord& y) {
                  return x.arc_s < y.arc_s;
              });
    // dedupe roots found by more than one detector
    double sample_pitch = smp.back().s / std::max<std::size_t>(1, smp.size() - 1);
    records.erase(std::unique(records.begin(), records.end(),
                              [&](const SingularPointRecord& x, const SingularPointRecord& y) {
                                  return std::abs(x.arc_s - y.arc_s) < 2.0 * sample_pitch;
                              }),
                  records.end());
    return records;
}

// ---------------------------------------------------------------------------
// singular curvature

double singular_curvature(const SurfaceMap& map, Vec2 p, bool reversed) {
    double dir = reversed ? -1.0 : 1.0;
    Vec2 w = map.sing_tangent(p) * dir;
    double wn = w.norm();
    if (wn < 1e-10)
        throw DegeneracyError("singular tangent vanishes (degenerate point)");
    Vec2 eta = map.null_direction(p);
    if (w.cross(eta) < 0.0) eta = -eta;  // {gamma', eta} positively oriented
    double dl_eta = map.dlambda(p).dot(eta);
    double sgn = dl_eta >= 0.0 ? 1.0 : -1.0;

    Vec2 f1 = map.df_sing_tangent(p) * dir;
    Vec2 q = map(p);
    const MetricChart& target = map.target();
    double speed = target.metric_norm(q, f1);
    if (speed < 1e-9 * wn)
        throw ZeroVelocityError("singular curvature requested at a second-kind point");

    // covariant acceleration of the image curve under the W-parametrization
    Christoffels c = target.christoffel(q);
    Vec2 f2 = map.sing_accel_flat(p);
    double vv[2] = {f1.x, f1.y};
    double add[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) add[k] += c.G[k][i][j] * vv[i] * vv[j];
    f2 += Vec2{add[0], add[1]};

    Vec2 n = target.rotate90(q, f1 / speed);
    return sgn * target.metric_dot(q, f2, n) / (speed * speed);
}

double singular_curvature_density(const SurfaceMap& map, Vec2 p) {
    Vec2 w = map.sing_tangent(p);
    double wn = w.norm();
    if (wn < 1e-10)
        throw DegeneracyError("singular tangent vanishes (degenerate point)");
    Vec2 eta = map.null_direction(p);
    if (w.cross(eta) < 0.0) eta = -eta;
    double dl_eta = map.dlambda(p).dot(eta);
    double sgn = dl_eta >= 0.0 ? 1.0 : -1.0;

    Vec2 f1 = map.df_sing_tangent(p);
    Vec2 q = map(p);
    const MetricChart& target = map.target();
    double speed = target.metric_norm(q, f1);
    if (speed < 1e-13)
        return 0.0;  // evaluated exactly at a second-kind point: measure density -> 0 limit

    Christoffels c = target.christoffel(q);
    Vec2 f2 = map.sing_accel_flat(p);
    double vv[2] = {f1.x, f1.y};
    double add[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) add[k] += c.G[k][i][j] * vv[i] * vv[j];
    f2 += Vec2{add[0], add[1]};

    Vec2 n = target.rotate90(q, f1 / speed);
    // kappa_s |f'| / |W| = <f'', n> sgn / (|f'| |W|)
    return sgn * target.metric_dot(q, f2, n) / (speed * wn);
}

// ---------------------------------------------------------------------------
// sector angles

namespace {

struct CircleArc {
    double phi0, phi1;        // phi1 > phi0, arc runs counterclockwise
    bool bdry0 = false;       // endpoint cut by dM (else by the singular set)
    bool bdry1 = false;
};

// Arcs of the circle of radius r about p lying in M with the requested
// lambda sign. Returns false when the side could not be isolated cleanly.
bool sector_arcs(const SurfaceMap& map, const PlanarDomain& dom, Vec2 p, double r,
                 int side_sign, std::vector<CircleArc>& arcs) {
    const int n = 720;
    struct Status {
        bool in = false;
        int sign = 0;
    };
    std::vector<Status> st(n);
    auto status_at = [&](double phi) {
        Status s;
        Vec2 q = p + Vec2{r * std::cos(phi), r * std::sin(phi)};
        if (!dom.contains(q)) return s;
        double l = lambda_guarded(map, q);
        if (!std::isfinite(l)) return s;
        s.in = true;
        s.sign = l > 0.0 ? 1 : (l < 0.0 ? -1 : 0);
        return s;
    };
    for (int i = 0; i < n; ++i) st[i] = status_at(kTwoPi * i / n);

    auto same = [](const Status& a, const Status& b) {
        return a.in == b.in && a.sign == b.sign;
    };

    // breakpoints between samples i and i+1 where the status changes;
    // remember whether membership (dM) or the lambda sign flipped
    struct Cut {
        double phi;
        bool membership;
        bool operator<(const Cut& o) const { return phi < o.phi; }
    };
    std::vector<Cut> cuts;
    for (int i = 0; i < n; ++i) {
        const Status& a = st[i];
        const Status& b = st[(i + 1) % n];
        if (same(a, b)) continue;
        double lo = kTwoPi * i / n, hi = kTwoPi * (i + 1) / n;
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            if (same(status_at(mid), a)) lo = mid;
            else hi = mid;
        }
        cuts.push_back({0.5 * (lo + hi), a.in != b.in});
    }
    arcs.clear();
    if (cuts.empty()) {
        // uniform status around the full circle
        Status s = st[0];
        if (s.in && s.sign == side_sign) arcs.push_back({0.0, kTwoPi});
        return true;
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        const Cut& a = cuts[k];
        const Cut& b = k + 1 < cuts.size() ? cuts[k + 1]
                                           : Cut{cuts[0].phi + kTwoPi, cuts[0].membership};
        Status s = status_at(0.5 * (a.phi + b.phi));
        if (s.in && s.sign == side_sign)
            arcs.push_back({a.phi, b.phi, a.membership, b.membership});
    }
    return true;
}

// Image direction of the boundary edge at the arc endpoint q, oriented away
// from the vertex p. Near a null direction df(radial ray) and df(boundary
// tangent) differ by a finite angle even as r -> 0; the sector edge is the
// boundary curve, so the sweep endpoints must use its image tangent.
std::optional<Vec2> boundary_edge_image_dir(const SurfaceMap& map, const PlanarDomain& dom,
                                            Vec2 p, Vec2 q) {
    auto [loop_idx, t] = dom.nearest_boundary(q);
    const BoundaryLoop& loop = dom.loops()[static_cast<std::size_t>(loop_idx)];
    for (int it = 0; it < 4; ++it) {
        Vec2 d = dom.wrapped_diff(loop.point(t), q);
        Vec2 vel = loop.velocity(t);
        double v2 = vel.norm2();
        if (v2 < 1e-18) break;
        t -= d.dot(vel) / v2;
    }
    Vec2 d_dom = loop.velocity(t);
    if (d_dom.dot(dom.wrapped_diff(q, p)) < 0.0) d_dom = -d_dom;
    Vec2 img = map.jacobian(q) * d_dom;
    if (img.norm() < 1e-13) return std::nullopt;
    return img;
}

// Total rotation of Y(phi) = df(w)/|df(w)|_g along one arc, corrected by
// parallel transport in the target along the image of the arc. Endpoints
// cut by the boundary are re-anchored to the image tangent of the boundary
// curve itself.
double sweep_arc(const SurfaceMap& map, const PlanarDomain& dom, Vec2 p, double r,
                 const CircleArc& arc) {
    const MetricChart& target = map.target();
    bool flat = target.is_flat();

    auto Y_at = [&](double phi) -> std::pair<Vec2, Vec2> {  // (image point, direction)
        Vec2 w{std::cos(phi), std::sin(phi)};
        Vec2 q = p + w * r;
        Vec2 img = map(q);
        Vec2 y = map.jacobian(q) * w;
        return {img, y};
    };

    // recursive stepping: halve the step until each rotation increment is
    // small; increments accumulate exactly for the flat case
    std::function<double(double, double, std::pair<Vec2, Vec2>&, int)> walk =
        [&](double a, double b, std::pair<Vec2, Vec2>& ya, int depth) -> double {
        auto yb = Y_at(b);
        double inc;
        if (flat) {
            inc = std::atan2(ya.second.cross(yb.second), ya.second.dot(yb.second));
        } else {
            // transport ya.second along the image of the arc [a, b]
            auto pos = [&](double s) { return Y_at(s).first; };
            auto vel = [&](double s) {
                double hh = 1e-5 * (b - a + 1e-12);
                return (Y_at(s + hh).first - Y_at(s - hh).first) / (2 * hh);
            };
            Vec2 transported = target.parallel_transport(pos, vel, a, b, 2, ya.second);
            inc = target.signed_angle(yb.first, transported, yb.second);
        }
        if (std::abs(inc) > 0.5 && depth < 26) {
            double m = 0.5 * (a + b);
            double left = walk(a, m, ya, depth + 1);
            double right = walk(m, b, ya, depth + 1);
            return left + right;
        }
        ya = yb;
        return inc;
    };

    int coarse = flat ? 64 : 256;
    coarse = std::max(16, static_cast<int>(coarse * (arc.phi1 - arc.phi0) / kTwoPi) + 8);
    auto start = Y_at(arc.phi0);
    auto cur = start;
    double total = 0.0;
    for (int i = 0; i < coarse; ++i) {
        double a = arc.phi0 + (arc.phi1 - arc.phi0) * i / coarse;
        double b = arc.phi0 + (arc.phi1 - arc.phi0) * (i + 1) / coarse;
        total += walk(a, b, cur, 0);
    }
    if (arc.bdry0) {
        Vec2 q = p + Vec2{r * std::cos(arc.phi0), r * std::sin(arc.phi0)};
        if (auto d = boundary_edge_image_dir(map, dom, p, q))
            total += target.signed_angle(start.first, *d, start.second);
    }
    if (arc.bdry1) {
        Vec2 q = p + Vec2{r * std::cos(arc.phi1), r * std::sin(arc.phi1)};
        if (auto d = boundary_edge_image_dir(map, dom, p, q))
            total += target.signed_angle(cur.first, cur.second, *d);
    }
    return total;
}

} // namespace

AngleEstimate sector_angle(const SurfaceMap& map, const PlanarDomain& dom, Vec2 p,
                           SectorSide side, double r0) {
    int side_sign = side == SectorSide::Plus ? 1 : -1;
    AngleEstimate est;
    double r = r0;
    for (int k = 0; k < 3; ++k, r *= 0.5) {
        std::vector<CircleArc> arcs;
        double rr = r;
        int attempts = 0;
        for (;;) {
            sector_arcs(map, dom, p, rr, side_sign, arcs);
            if (!arcs.empty() || ++attempts > 4) break;
            rr *= 0.75;
        }
        if (arcs.empty())
            throw EstimatorError("could not isolate a sector of the requested sign at (" +
                                 std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        double sweep = 0.0;
        for (const CircleArc& a : arcs) sweep += sweep_arc(map, dom, p, rr, a);
        est.per_radius[static_cast<std::size_t>(k)] = side_sign * sweep;
    }
    double a0 = est.per_radius[0], a1 = est.per_radius[1], a2 = est.per_radius[2];
    double d1 = a1 - a0, d2 = a2 - a1;
    if (std::abs(d2) < 1e-12) {
        est.extrapolated = a2;
    } else {
        double ratio = d1 / d2;
        if (ratio > 1.1) {
            double order = std::clamp(std::log2(ratio), 0.5, 3.0);
            est.extrapolated = a2 + d2 / (std::pow(2.0, order) - 1.0);
        } else {
            est.extrapolated = a2;
        }
    }
    est.value = est.extrapolated;
    double k = std::round(est.extrapolated / kPi);
    est.lattice_distance = std::abs(est.extrapolated - k * kPi);
    return est;
}

// ---------------------------------------------------------------------------
// sign classification

namespace {

// Shrink the sweep radius until the circle shows the expected cut pattern:
// around an interior second-kind point the whole circle lies in M and meets
// the singular set exactly twice; around a boundary point the circle leaves
// M exactly twice and meets the singular set once inside. Larger radii pick
// up unrelated branches of the singular set and ruin the sweep.
double clean_sector_radius(const SurfaceMap& map, const PlanarDomain& dom, Vec2 p,
                           bool interior, double r_start) {
    const int n = 360;
    for (double r = r_start; r > 2e-4; r *= 0.6) {
        int mem_cuts = 0, lam_cuts = 0;
        bool prev_in = false;
        int prev_sign = 0;
        bool valid = true;
        for (int i = 0; i <= n; ++i) {
            double phi = kTwoPi * i / n;
            Vec2 q = p + Vec2{r * std::cos(phi), r * std::sin(phi)};
            bool in = dom.contains(q);
            int sign = 0;
            if (in) {
                double l = lambda_guarded(map, q);
                if (!std::isfinite(l)) {
                    valid = false;
                    break;
                }
                sign = l > 0.0 ? 1 : (l < 0.0 ? -1 : 0);
            }
            if (i) {
                if (in != prev_in) ++mem_cuts;
                else if (in && sign != prev_sign && sign != 0 && prev_sign != 0)
                    ++lam_cuts;
            }
            prev_in = in;
            prev_sign = sign;
        }
        if (!valid) continue;
        if (interior && mem_cuts == 0 && lam_cuts == 2) return r;
        if (!interior && mem_cuts == 2 && lam_cuts == 1) return r;
    }
    throw EstimatorError("no clean sweep radius around (" + std::to_string(p.x) + ", " +
                         std::to_string(p.y) + "); the point sits too close to other "
                         "features");
}

// joint snap of (alpha+, alpha-) onto admissible lattice pairs
bool snap_pair(AngleEstimate& ap, AngleEstimate& am,
               const std::vector<std::pair<double, double>>& lattice) {
    double best = std::numeric_limits<double>::max();
    std::pair<double, double> chosen{0.0, 0.0};
    for (auto [lp, lm] : lattice) {
        double dev = std::max(std::abs(ap.extrapolated - lp), std::abs(am.extrapolated - lm));
        if (dev < best) {
            best = dev;
            chosen = {lp, lm};
        }
    }
    if (best > kSnapTol) return false;
    ap.value = chosen.first;
    ap.snapped = true;
    ap.lattice_distance = std::abs(ap.extrapolated - chosen.first);
    am.value = chosen.second;
    am.snapped = true;
    am.lattice_distance = std::abs(am.extrapolated - chosen.second);
    return true;
}

} // namespace

void classify_sign(const SurfaceMap& map, const PlanarDomain& dom,
                   SingularPointRecord& rec, double r0) {
    bool interior = rec.stratum == PointStratum::InteriorSecondKind;
    r0 = clean_sector_radius(map, dom, rec.location, interior, r0);

    // Convergence of the sweep sets in only below the local feature scale
    // (for instance the angle between the null direction and the boundary);
    // when the extrapolated pair misses the lattice, retry closer in.
    auto estimate_snapped = [&](const std::vector<std::pair<double, double>>& lattice,
                                const char* what) {
        double r = r0;
        for (int attempt = 0;; ++attempt) {
            rec.alpha_plus = sector_angle(map, dom, rec.location, SectorSide::Plus, r);
            rec.alpha_minus = sector_angle(map, dom, rec.location, SectorSide::Minus, r);
            if (snap_pair(rec.alpha_plus, rec.alpha_minus, lattice)) return;
            if (attempt >= 3 || r < 2e-3)
                throw EstimatorError(
                    std::string(what) + " sector angles not on the pi-lattice: alpha+ = " +
                    std::to_string(rec.alpha_plus.extrapolated) + ", alpha- = " +
                    std::to_string(rec.alpha_minus.extrapolated));
            r *= 0.25;
        }
    };

    if (interior) {
        estimate_snapped({{2 * kPi, 0.0}, {kPi, kPi}, {0.0, 2 * kPi}}, "interior");
        double diff = rec.alpha_plus.value - rec.alpha_minus.value;
        rec.sign_class = diff > kPi ? SignClass::Positive
                                    : (diff < -kPi ? SignClass::Negative : SignClass::Null);
        return;
    }

    // boundary point: null test against the boundary direction first
    if (!rec.crossing)
        throw EstimatorError("boundary record without crossing data");
    const BoundaryLoop& loop = dom.loops()[static_cast<std::size_t>(rec.crossing->loop)];
    Vec2 tb = loop.velocity(rec.crossing->loop_t).normalized();
    Vec2 eta = map.null_direction(rec.location);
    double det = std::abs(tb.cross(eta));

    if (det < 1e-3) {
        rec.sign_class = SignClass::Null;
        rec.alpha_plus = sector_angle(map, dom, rec.location, SectorSide::Plus, r0);
        rec.alpha_minus = sector_angle(map, dom, rec.location, SectorSide::Minus, r0);
        // no lattice constraint at null boundary points, but the two sector
        // angles must agree (alpha+ - alpha- = 0)
        if (std::abs(rec.alpha_plus.extrapolated - rec.alpha_minus.extrapolated) > 3 * kSnapTol)
            throw EstimatorError("null boundary point with unequal sector angles");
        return;
    }

    // angle route; start below the scale on which the null direction
    // separates from the boundary tangent
    r0 = std::min(r0, std::max(0.3 * det, 0.02));
    estimate_snapped({{kPi, 0.0}, {0.0, kPi}}, "boundary");
    bool angle_positive = rec.alpha_plus.value > rec.alpha_minus.value;

    // inward-null-ray route: which side does the kernel ray enter?
    Vec2 inward = tb.perp();  // region on the left of the traversal
    Vec2 ray = eta.dot(inward) >= 0.0 ? eta : -eta;
    double scale = std::min(0.02, 0.5 * r0);
    int seen = 0;
    bool ray_positive = false;
    for (double d : {1.0, 2.0, 4.0}) {
        Vec2 q = rec.location + ray * (d * scale * 0.25);
        if (!dom.contains(q)) continue;
        double l = lambda_guarded(map, q);
        if (!std::isfinite(l) || l == 0.0) continue;
        int s = l > 0.0 ? 1 : -1;
        if (seen && ((s > 0) != ray_positive))
            throw EstimatorError("inward null ray sees both signs (point too degenerate)");
        ray_positive = s > 0;
        ++seen;
    }
    if (seen == 0)
        throw EstimatorError("inward null ray left the domain immediately");

    if (angle_positive != ray_positive)
        throw EstimatorError("boundary sign classifiers disagree at (" +
                             std::to_string(rec.location.x) + ", " +
                             std::to_string(rec.location.y) + ")");
    rec.sign_class = angle_positive ? SignClass::Positive : SignClass::Negative;
}

// ---------------------------------------------------------------------------
// transversality

TransversalityReport transversality_check(const SurfaceMap& map, const PlanarDomain& dom,
                                          const std::vector<SingularComponent>& components,
                                          bool require_empty) {
    TransversalityReport rep;
    auto note = [&](const std::string& s) {
        rep.ok = false;
        rep.violations.push_back(s);
    };

    std::vector<std::pair<int, double>> crossing_params;  // (loop, t)
    for (const auto& comp : components)
        for (const auto& cr : {comp.start_crossing, comp.end_crossing}) {
            if (!cr) continue;
            crossing_params.push_back({cr->loop, cr->loop_t});
            if (require_empty) {
                note("singular set meets the boundary at loop " + std::to_string(cr->loop) +
                     ", t = " + std::to_string(cr->loop_t));
                continue;
            }
            const BoundaryLoop& loop = dom.loops()[static_cast<std::size_t>(cr->loop)];
            Vec2 tb = loop.velocity(cr->loop_t).normalized();
            Vec2 w = map.sing_tangent(cr->p);
            double wn = w.norm();
            if (wn < 1e-12) {
                note("degenerate singular tangent at a boundary crossing");
                continue;
            }
            if (std::abs((w / wn).cross(tb)) < 1e-4)
                note("singular set tangent to the boundary at loop " +
                     std::to_string(cr->loop) + ", t = " + std::to_string(cr->loop_t));
        }
    if (require_empty && !crossing_params.empty()) return rep;

    // tangential (even-order) contacts the trace cannot see: scan |lambda|
    // minima along each loop
    const int n = 2048;
    for (std::size_t li = 0; li < dom.loops().size(); ++li) {
        const BoundaryLoop& loop = dom.loops()[li];
        std::vector<double> lam(n);
        double scale = 0.0;
        for (int i = 0; i < n; ++i) {
            lam[static_cast<std::size_t>(i)] = lambda_guarded(map, loop.point(kTwoPi * i / n));
            if (std::isfinite(lam[static_cast<std::size_t>(i)]))
                scale = std::max(scale, std::abs(lam[static_cast<std::size_t>(i)]));
        }
        if (scale == 0.0) {
            note("lambda vanishes identically along boundary loop " + std::to_string(li));
            continue;
        }
        for (int i = 0; i < n; ++i) {
            double prev = lam[static_cast<std::size_t>((i + n - 1) % n)];
            double cur = lam[static_cast<std::size_t>(i)];
            double next = lam[static_cast<std::size_t>((i + 1) % n)];
            if (!std::isfinite(prev) || !std::isfinite(cur) || !std::isfinite(next)) continue;
            if (std::abs(cur) > 1e-4 * scale) continue;
            if (std::abs(cur) > std::abs(prev) || std::abs(cur) > std::abs(next)) continue;
            if (prev * next < 0.0) continue;  // transversal crossing, handled above
            double t = kTwoPi * i / n;
            bool near_known = false;
            for (auto [lj, tj] : crossing_params)
                if (lj == static_cast<int>(li) &&
                    std::abs(std::remainder(t - tj, kTwoPi)) < 8.0 * kTwoPi / n)
                    near_known = true;
            if (!near_known)
                note("tangential contact of the singular set with boundary loop " +
                     std::to_string(li) + " near t = " + std::to_string(t));
        }
    }
    if (require_empty) {
        for (const auto& comp : components)
            if (!comp.closed)
                note("open singular arc present; closed singular loops required");
    }
    return rep;
}

} // namespace gbmap
