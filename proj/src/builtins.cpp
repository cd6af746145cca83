#include "gbmap/scenario.hpp"

namespace gbmap {

namespace {

ScenarioConfig base(const std::string& name, const std::string& summary) {
    ScenarioConfig c;
    c.name = name;
    c.summary = summary;
    return c;
}

std::vector<ScenarioConfig> make_builtins() {
    std::vector<ScenarioConfig> out;

    {
        ScenarioConfig c = base("identity-disk",
                                "identity on the unit disk, flat target; the classical "
                                "boundary-only case");
        c.map_x = "u";
        c.map_y = "v";
        c.loops = {{"cos(t)", "sin(t)"}};
        c.theorems = {"gb1", "gb2"};
        c.tolerance = 6.283185307179586e-8;  // 1e-8 * 2pi
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("fold-disk",
                                "(u, v^2) on the unit disk: one fold diameter with two "
                                "null boundary points");
        c.map_x = "u";
        c.map_y = "v^2";
        c.loops = {{"cos(t)", "sin(t)"}};
        c.theorems = {"gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("cusp-disk",
                                "(u^3 - 3uv, v) on the unit disk: one interior cusp, two "
                                "non-null boundary points");
        c.map_x = "u^3 - 3*u*v";
        c.map_y = "v";
        c.loops = {{"cos(t)", "sin(t)"}};
        c.theorems = {"gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("annulus-concentric-fold",
                                "radial fold circle inside the annulus 1 <= r <= 2; the "
                                "rotation-index identity");
        std::string g = "(0.5 + (sqrt(u^2 + v^2) - 1.5)^2)/sqrt(u^2 + v^2)";
        c.map_x = g + " * u";
        c.map_y = g + " * v";
        c.loops = {{"2*cos(t)", "2*sin(t)"}, {"cos(t)", "-sin(t)"}};
        c.theorems = {"levine", "gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("nested-fold-circles",
                                "two concentric fold circles (r = 1 and r = 2) inside the "
                                "disk of radius 2.5");
        // rho(r) = r^5/5 - 5 r^3/3 + 4 r, so rho'(r) = (r^2 - 1)(r^2 - 4)
        std::string g = "((u^2 + v^2)^2/5 - 5*(u^2 + v^2)/3 + 4)";
        c.map_x = g + " * u";
        c.map_y = g + " * v";
        c.loops = {{"2.5*cos(t)", "2.5*sin(t)"}};
        c.theorems = {"levine", "gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("cylinder-4-folds",
                                "four fold circles on the flat cylinder: alternating "
                                "annular bands, all terms vanish");
        c.map_x = "u";
        c.map_y = "v + (1.5/(4*pi))*sin(4*pi*v)";
        c.period_x = 1.0;
        c.x_min = 0.0;
        c.x_max = 1.0;
        c.y_min = -0.5;
        c.y_max = 1.5;
        c.boundary_y0 = 0.0;
        c.boundary_y1 = 1.0;
        c.domain_kind = "strip";
        c.domain_period = 1.0;
        c.loops = {{"t/(2*pi)", "0"}, {"1 - t/(2*pi)", "1"}};
        c.theorems = {"gb1", "gb2", "qfi"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("cylinder-degree-2",
                                "double cover of the flat cylinder, no singular points");
        c.map_x = "2*u";
        c.map_y = "v";
        c.period_x = 1.0;
        c.x_min = 0.0;
        c.x_max = 1.0;
        c.y_min = -0.5;
        c.y_max = 1.5;
        c.boundary_y0 = 0.0;
        c.boundary_y1 = 1.0;
        c.domain_kind = "strip";
        c.domain_period = 1.0;
        c.loops = {{"t/(2*pi)", "0"}, {"1 - t/(2*pi)", "1"}};
        c.theorems = {"qfi", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("cylinder-fold-degree-1",
                                "two fold circles on a curved cylinder (K != 0), degree 1 "
                                "with the curvature-ratio cross-check");
        c.map_x = "u";
        c.map_y = "v + 0.5*sin(2*pi*v)";
        c.E = "exp(0.6*y^2)";
        c.F = "0";
        c.G = "exp(0.6*y^2)";
        c.K = "-0.6*exp(-0.6*y^2)";
        c.period_x = 1.0;
        c.x_min = 0.0;
        c.x_max = 1.0;
        c.y_min = -0.5;
        c.y_max = 1.5;
        c.boundary_y0 = 0.0;
        c.boundary_y1 = 1.0;
        c.domain_kind = "strip";
        c.domain_period = 1.0;
        c.loops = {{"t/(2*pi)", "0"}, {"1 - t/(2*pi)", "1"}};
        c.theorems = {"qfi", "gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("sphere-target-fold",
                                "radial fold of the annulus into the stereographic sphere "
                                "chart (K = +1)");
        std::string g = "(0.5 + (sqrt(u^2 + v^2) - 1.5)^2)/sqrt(u^2 + v^2)";
        c.map_x = g + " * u";
        c.map_y = g + " * v";
        c.E = "4/(1 + x^2 + y^2)^2";
        c.F = "0";
        c.G = "4/(1 + x^2 + y^2)^2";
        c.K = "1";
        c.x_min = -1.5;
        c.x_max = 1.5;
        c.y_min = -1.5;
        c.y_max = 1.5;
        c.loops = {{"2*cos(t)", "2*sin(t)"}, {"cos(t)", "-sin(t)"}};
        c.theorems = {"gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("hyperbolic-target-fold",
                                "(u, 2 + v^2) into the upper half plane (K = -1): fold "
                                "diameter with curved-target null boundary points");
        c.map_x = "u";
        c.map_y = "2 + v^2";
        c.E = "1/y^2";
        c.F = "0";
        c.G = "1/y^2";
        c.K = "-1";
        c.x_min = -2.0;
        c.x_max = 2.0;
        c.y_min = 0.5;
        c.y_max = 4.0;
        c.loops = {{"cos(t)", "sin(t)"}};
        c.theorems = {"gb1", "gb2"};
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("cusp-on-cylinder",
                                "strip map with two singular loops carrying a cusp pair "
                                "each, degree 1");
        c.map_x = "u";
        c.map_y = "v + 0.38*sin(2*pi*u)*sin(pi*v)^2";
        c.period_x = 1.0;
        c.x_min = 0.0;
        c.x_max = 1.0;
        c.y_min = -0.5;
        c.y_max = 1.5;
        c.boundary_y0 = 0.0;
        c.boundary_y1 = 1.0;
        c.domain_kind = "strip";
        c.domain_period = 1.0;
        c.loops = {{"t/(2*pi)", "0"}, {"1 - t/(2*pi)", "1"}};
        c.theorems = {"qfi", "gb1", "gb2"};
        c.resolution = 192;
        out.push_back(c);
    }
    {
        ScenarioConfig c = base("fuzz-trig",
                                "randomized trigonometric perturbations of the identity "
                                "on the unit disk (seeded)");
        c.map_x = "u + a*sin(2*pi*v) + b*cos(2*pi*u)";
        c.map_y = "v + c*sin(2*pi*u) + d*cos(2*pi*v)";
        c.loops = {{"cos(t)", "sin(t)"}};
        c.theorems = {"gb2"};
        c.randomized = true;
        c.tolerance = 6.283185307179586e-2;
        out.push_back(c);
    }
    return out;
}

} // namespace

const std::vector<ScenarioConfig>& builtin_scenarios() {
    static const std::vector<ScenarioConfig> scenarios = make_builtins();
    return scenarios;
}

const ScenarioConfig* find_builtin(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (s.name == name) return &s;
    return nullptr;
}

} // namespace gbmap
