#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "gbmap/scenario.hpp"

namespace gbmap {

namespace {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

struct Table {
    std::map<std::string, std::map<std::string, Value>> sections;

    const Value* find(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    std::optional<std::string> str(const std::string& s, const std::string& k) const {
        const Value* v = find(s, k);
        if (!v) return std::nullopt;
        if (const auto* p = std::get_if<std::string>(v)) return *p;
        throw ConfigError("expected a quoted string for " + s + "." + k);
    }
    std::optional<double> num(const std::string& s, const std::string& k) const {
        const Value* v = find(s, k);
        if (!v) return std::nullopt;
        if (const auto* p = std::get_if<double>(v)) return *p;
        throw ConfigError("expected a number for " + s + "." + k);
    }
    std::optional<std::vector<std::string>> list(const std::string& s,
                                                 const std::string& k) const {
        const Value* v = find(s, k);
        if (!v) return std::nullopt;
        if (const auto* p = std::get_if<std::vector<std::string>>(v)) return *p;
        throw ConfigError("expected an array of strings for " + s + "." + k);
    }
};

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Value parse_value(const std::string& raw, int lineno) {
    std::string v = strip(raw);
    if (v.empty()) throw ConfigError("empty value on line " + std::to_string(lineno));
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("unterminated string on line " + std::to_string(lineno));
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("unterminated array on line " + std::to_string(lineno));
        std::vector<std::string> items;
        std::string body = v.substr(1, v.size() - 2);
        std::size_t pos = 0;
        while (pos < body.size()) {
            std::size_t q0 = body.find('"', pos);
            if (q0 == std::string::npos) break;
            std::size_t q1 = body.find('"', q0 + 1);
            if (q1 == std::string::npos)
                throw ConfigError("unterminated string in array on line " +
                                  std::to_string(lineno));
            items.push_back(body.substr(q0 + 1, q1 - q0 - 1));
            pos = q1 + 1;
        }
        return items;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("cannot parse value '" + v + "' on line " + std::to_string(lineno));
    return d;
}

Table parse_table(const std::string& text) {
    Table table;
    std::string section = "";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // cut comments outside strings
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line = line.substr(0, i);
                break;
            }
        }
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("bad section header on line " + std::to_string(lineno));
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value on line " + std::to_string(lineno));
        std::string key = strip(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("empty key on line " + std::to_string(lineno));
        table.sections[section][key] = parse_value(line.substr(eq + 1), lineno);
    }
    return table;
}

} // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
    Table t = parse_table(text);
    ScenarioConfig cfg;
    cfg.name = t.str("", "name").value_or(origin);

    cfg.map_x = t.str("map", "x").value_or("");
    cfg.map_y = t.str("map", "y").value_or("");
    if (cfg.map_x.empty() || cfg.map_y.empty())
        throw ConfigError("config must define [map] x and y");

    cfg.E = t.str("target", "E").value_or("1");
    cfg.F = t.str("target", "F").value_or("0");
    cfg.G = t.str("target", "G").value_or("1");
    cfg.K = t.str("target", "K");
    cfg.validity = t.str("target", "validity").value_or("rect");
    cfg.x_min = t.num("target", "x_min").value_or(-10.0);
    cfg.x_max = t.num("target", "x_max").value_or(10.0);
    cfg.y_min = t.num("target", "y_min").value_or(-10.0);
    cfg.y_max = t.num("target", "y_max").value_or(10.0);
    cfg.disk_center_x = t.num("target", "center_x").value_or(0.0);
    cfg.disk_center_y = t.num("target", "center_y").value_or(0.0);
    cfg.disk_radius = t.num("target", "radius").value_or(1.0);
    cfg.period_x = t.num("target", "period_x");
    cfg.boundary_y0 = t.num("target", "boundary_y0");
    cfg.boundary_y1 = t.num("target", "boundary_y1");

    cfg.domain_kind = t.str("domain", "kind").value_or("disk");
    cfg.domain_period = t.num("domain", "period").value_or(1.0);
    auto loop_names = t.list("domain", "loops");
    if (!loop_names || loop_names->empty())
        throw ConfigError("config must list [domain] loops");
    for (const auto& ln : *loop_names) {
        auto u = t.str(ln, "u");
        auto v = t.str(ln, "v");
        if (!u || !v)
            throw ConfigError("loop section [" + ln + "] must define u and v");
        cfg.loops.push_back({*u, *v});
    }

    cfg.theorems = t.list("run", "theorems").value_or(std::vector<std::string>{"gb1", "gb2"});
    cfg.tolerance = t.num("run", "tolerance").value_or(cfg.tolerance);
    cfg.resolution = static_cast<int>(t.num("run", "resolution").value_or(96.0));
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

Scenario build_scenario(const ScenarioConfig& config) {
    const std::vector<std::string> uv = {"u", "v"};
    const std::vector<std::string> xy = {"x", "y"};
    const std::vector<std::string> tv = {"t"};

    try {
        ChartRegion region;
        if (config.validity == "rect")
            region = ChartRegion::rectangle(config.x_min, config.x_max, config.y_min,
                                            config.y_max);
        else if (config.validity == "disk")
            region = ChartRegion::disk({config.disk_center_x, config.disk_center_y},
                                       config.disk_radius);
        else
            throw ConfigError("unknown validity region kind '" + config.validity + "'");

        std::optional<Expr> K;
        if (config.K) K = parse_expression(*config.K, xy);
        MetricChart chart(parse_expression(config.E, xy), parse_expression(config.F, xy),
                          parse_expression(config.G, xy), region, K, config.period_x);

        SurfaceMap map(parse_expression(config.map_x, uv),
                       parse_expression(config.map_y, uv), std::move(chart));

        std::vector<BoundaryLoop> loops;
        for (const auto& [us, vs] : config.loops)
            loops.push_back(BoundaryLoop(parse_expression(us, tv), parse_expression(vs, tv)));

        PlanarDomain domain = [&] {
            if (config.domain_kind == "disk") return PlanarDomain::disk(std::move(loops));
            if (config.domain_kind == "strip") {
                if (loops.size() != 2)
                    throw ConfigError("strip domains need exactly two loops");
                return PlanarDomain::strip(std::move(loops[0]), std::move(loops[1]),
                                           config.domain_period);
            }
            throw ConfigError("unknown domain kind '" + config.domain_kind + "'");
        }();

        Scenario s{config.name, std::move(map), std::move(domain), std::nullopt,
                   config.theorems, config.tolerance, config.resolution};
        if (config.boundary_y0 && config.boundary_y1)
            s.target_domain = TargetDomain{*config.boundary_y0, *config.boundary_y1, 0};

        for (const auto& th : s.theorems)
            if (th != "gb1" && th != "gb2" && th != "levine" && th != "qfi")
                throw ConfigError("unknown theorem id '" + th + "'");
        if (std::find(s.theorems.begin(), s.theorems.end(), "qfi") != s.theorems.end() &&
            !s.target_domain)
            throw ConfigError("the degree identity needs target boundary_y0/boundary_y1");
        return s;
    } catch (const ParseError& e) {
        throw ConfigError("scenario '" + config.name + "': " + e.what());
    } catch (const MetricError& e) {
        throw ConfigError("scenario '" + config.name + "': " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError("scenario '" + config.name + "': " + e.what());
    }
}

} // namespace gbmap
