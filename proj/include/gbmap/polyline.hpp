#pragma once

#include <cstdint>
#include <vector>

#include "gbmap/geom.hpp"

namespace gbmap {

struct Polyline {
    std::vector<Vec2> points;
    std::vector<double> params;  // same length; parameter of each point

    std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }
};

// Squared distance from p to segment [a, b].
inline double segment_dist2(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + ab * t)).norm2();
}

inline bool segment_intersects_box(Vec2 a, Vec2 b, const BBox& box) {
    // quick reject on the segment bbox, then clip by the slab method
    if (std::max(a.x, b.x) < box.xmin || std::min(a.x, b.x) > box.xmax ||
        std::max(a.y, b.y) < box.ymin || std::min(a.y, b.y) > box.ymax)
        return false;
    if (box.contains(a) || box.contains(b)) return true;
    Vec2 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;
        double r = q / p;
        if (p < 0.0) {
            if (r > t1) return false;
            if (r > t0) t0 = r;
        } else {
            if (r < t0) return false;
            if (r < t1) t1 = r;
        }
        return true;
    };
    return clip(-d.x, a.x - box.xmin) && clip(d.x, box.xmax - a.x) &&
           clip(-d.y, a.y - box.ymin) && clip(d.y, box.ymax - a.y);
}

// Uniform-grid bucket index over segments of several tagged polylines.
// Used for "which curve pieces pass near this cell" queries during
// quadrature subdivision and region decomposition.
class SegmentGrid {
public:
    struct Entry {
        Vec2 a, b;
        std::int32_t tag = 0;      // owner id (loop or component index)
        std::int32_t seg = 0;      // segment index within the owner
        double t0 = 0.0, t1 = 0.0; // parameter range of the segment
    };

    SegmentGrid() = default;

    SegmentGrid(BBox box, int nx, int ny) : box_(box), nx_(nx), ny_(ny) {
        buckets_.resize(static_cast<std::size_t>(nx) * ny);
    }

    void add_segment(Vec2 a, Vec2 b, std::int32_t tag, std::int32_t seg,
                     double t0, double t1) {
        std::size_t idx = entries_.size();
        entries_.push_back({a, b, tag, seg, t0, t1});
        int i0, i1, j0, j1;
        range(a, b, i0, i1, j0, j1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(idx);
    }

    // Collect entries whose buckets overlap `query` (conservative superset).
    void query(const BBox& query, std::vector<const Entry*>& out) const {
        out.clear();
        ++stamp_value_;
        if (stamps_.size() != entries_.size()) stamps_.assign(entries_.size(), 0);
        int i0, i1, j0, j1;
        range({query.xmin, query.ymin}, {query.xmax, query.ymax}, i0, i1, j0, j1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                for (std::size_t idx : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
                    if (stamps_[idx] == stamp_value_) continue;
                    stamps_[idx] = stamp_value_;
                    out.push_back(&entries_[idx]);
                }
    }

    bool any_segment_in_box(const BBox& b) const {
        std::vector<const Entry*> found;
        query(b, found);
        for (const Entry* e : found)
            if (segment_intersects_box(e->a, e->b, b)) return true;
        return false;
    }

    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    void range(Vec2 a, Vec2 b, int& i0, int& i1, int& j0, int& j1) const {
        double xmin = std::min(a.x, b.x), xmax = std::max(a.x, b.x);
        double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
        i0 = clampi(static_cast<int>((xmin - box_.xmin) / box_.width() * nx_), nx_);
        i1 = clampi(static_cast<int>((xmax - box_.xmin) / box_.width() * nx_), nx_);
        j0 = clampi(static_cast<int>((ymin - box_.ymin) / box_.height() * ny_), ny_);
        j1 = clampi(static_cast<int>((ymax - box_.ymin) / box_.height() * ny_), ny_);
    }
    static int clampi(int v, int n) { return std::min(std::max(v, 0), n - 1); }

    BBox box_;
    int nx_ = 1, ny_ = 1;
    std::vector<Entry> entries_;
    std::vector<std::vector<std::size_t>> buckets_;
    mutable std::vector<std::uint32_t> stamps_;
    mutable std::uint32_t stamp_value_ = 0;
};

} // namespace gbmap
