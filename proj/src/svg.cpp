#include <cstdio>
#include <fstream>
#include <sstream>

#include "gbmap/scenario.hpp"

namespace gbmap {

namespace {

struct Mapper {
    BBox world;
    double size = 800.0;
    double margin = 30.0;

    double scale() const {
        return (size - 2 * margin) / std::max(world.width(), world.height());
    }
    double sx(double x) const { return margin + (x - world.xmin) * scale(); }
    double sy(double y) const { return size - margin - (y - world.ymin) * scale(); }
};

std::string path_of(const std::vector<Vec2>& pts, const Mapper& m) {
    std::ostringstream os;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        os << (i ? " L " : "M ");
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.2f %.2f", m.sx(pts[i].x), m.sy(pts[i].y));
        os << buf;
    }
    return os.str();
}

} // namespace

void write_svg(const std::string& path, const Scenario& scenario,
               const ScenarioOutcome& outcome) {
    Mapper m;
    m.world = scenario.domain.bbox().inflated(0.05 * std::max(scenario.domain.bbox().width(),
                                                              scenario.domain.bbox().height()));
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m.size << "\" height=\""
       << m.size << "\" viewBox=\"0 0 " << m.size << " " << m.size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // region shading by the sign of lambda
    int n = 160;
    const BBox& box = scenario.domain.bbox();
    double cw = box.width() / n, ch = box.height() / n;
    os << "<g stroke=\"none\">\n";
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Vec2 c{box.xmin + (i + 0.5) * cw, box.ymin + (j + 0.5) * ch};
            if (!scenario.domain.contains(c)) continue;
            double l;
            try {
                l = scenario.map.lambda(c);
            } catch (const Error&) {
                continue;
            }
            const char* fill = l > 0 ? "#cfe4f7" : "#f7ddc4";
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                          "fill=\"%s\"/>\n",
                          m.sx(c.x - 0.5 * cw), m.sy(c.y + 0.5 * ch), cw * m.scale(),
                          ch * m.scale(), fill);
            os << buf;
        }
    os << "</g>\n";

    // boundary loops with orientation arrows
    for (const auto& loop : scenario.domain.loops()) {
        std::vector<Vec2> pts = loop.polyline().points;
        os << "<path d=\"" << path_of(pts, m)
           << "\" fill=\"none\" stroke=\"#202020\" stroke-width=\"2\"/>\n";
        for (int k = 0; k < 8; ++k) {
            double t = 2.0 * 3.14159265358979 * k / 8.0;
            Vec2 p = loop.point(t);
            Vec2 d = loop.velocity(t).normalized() * (8.0 / m.scale());
            Vec2 left = d.perp() * 0.5, tip = p + d;
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "<path d=\"M %.2f %.2f L %.2f %.2f L %.2f %.2f\" fill=\"#202020\"/>\n",
                          m.sx(p.x + left.x), m.sy(p.y + left.y), m.sx(tip.x), m.sy(tip.y),
                          m.sx(p.x - left.x), m.sy(p.y - left.y));
            os << buf;
        }
    }

    // singular curves
    for (const auto& poly : outcome.data.sigma) {
        std::vector<Vec2> pts;
        for (Vec2 p : poly.points) pts.push_back(scenario.domain.wrap(p));
        // split wrapped polylines at seam jumps
        std::vector<Vec2> run;
        double jump = 0.5 * box.width();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!run.empty() && std::abs(pts[i].x - run.back().x) > jump) {
                if (run.size() > 1)
                    os << "<path d=\"" << path_of(run, m)
                       << "\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"2.5\"/>\n";
                run.clear();
            }
            run.push_back(pts[i]);
        }
        if (run.size() > 1)
            os << "<path d=\"" << path_of(run, m)
               << "\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"2.5\"/>\n";
    }

    // classified distinguished points
    if (!outcome.reports.empty()) {
        for (const auto& p : outcome.reports.front().diag.points) {
            const char* color = p.sign_class == SignClass::Positive
                                    ? "#2e7d32"
                                    : (p.sign_class == SignClass::Negative ? "#6a1b9a"
                                                                           : "#616161");
            Vec2 w = scenario.domain.wrap(p.location);
            char buf[300];
            if (p.stratum == PointStratum::InteriorSecondKind)
                std::snprintf(buf, sizeof(buf),
                              "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"6\" fill=\"%s\"/>\n",
                              m.sx(w.x), m.sy(w.y), color);
            else
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.2f\" y=\"%.2f\" width=\"10\" height=\"10\" "
                              "fill=\"%s\"/>\n",
                              m.sx(w.x) - 5, m.sy(w.y) - 5, color);
            os << buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
                          "fill=\"#111\">a+ %.3f, a- %.3f</text>\n",
                          m.sx(w.x) + 8, m.sy(w.y) - 6, p.alpha_plus, p.alpha_minus);
            os << buf;
        }
    }

    os << "<text x=\"12\" y=\"20\" font-size=\"14\" fill=\"#111\">" << scenario.name
       << " (blue: orientation preserved, orange: reversed, red: singular set)</text>\n";
    os << "</svg>\n";

    std::ofstream f(path);
    if (!f) throw Error("cannot write SVG file '" + path + "'");
    f << os.str();
}

} // namespace gbmap
