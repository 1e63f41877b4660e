#include "risem/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "risem/array.hpp"
#include "risem/parallel.hpp"
#include "risem/patch.hpp"

namespace risem {

ScenarioError::ScenarioError(const std::string& what, int line, int column)
    : ValidationError(line > 0 ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                               : what),
      line_(line),
      column_(column) {}

std::vector<double> AngleGrid::values() const {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start_deg;
        return out;
    }
    const double step = (stop_deg - start_deg) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = start_deg + step * static_cast<double>(i);
    out.back() = stop_deg;
    return out;
}

std::vector<double> ObservationSpec::theta_values() const { return grid ? grid->values() : points_deg; }

std::vector<double> ObservationSpec::phi_values() const {
    return phi_grid ? phi_grid->values() : std::vector<double>{phi_deg};
}

// ---------------------------------------------------------------- parsing ---

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& msg) {
    const YAML::Mark m = node.Mark();
    throw ScenarioError(msg, m.line >= 0 ? m.line + 1 : 0, m.column >= 0 ? m.column + 1 : 0);
}

/// One mapping in the document. Keys are checked against an allow list and
/// every missing optional key is recorded as default-filled.
class Section {
public:
    Section(const YAML::Node& node, std::string path, std::vector<std::string>& defaults,
            std::initializer_list<std::string_view> allowed)
        : node_(node), path_(std::move(path)), defaults_(defaults) {
        if (!node.IsMap()) fail_at(node, path_ + ": expected a mapping");
        const std::set<std::string_view> keys(allowed);
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!keys.count(key)) fail_at(kv.first, path_ + ": unknown key '" + key + "'");
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
    YAML::Node child(const std::string& key) const { return node_[key]; }
    std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    T get(const std::string& key, T fallback) const {
        const YAML::Node v = node_[key];
        if (!v) {
            defaults_.push_back(path(key));
            return fallback;
        }
        return convert<T>(v, path(key));
    }

    template <typename T>
    T require(const std::string& key) const {
        const YAML::Node v = node_[key];
        if (!v) fail_at(node_, path_ + ": missing required key '" + key + "'");
        return convert<T>(v, path(key));
    }

    template <typename T>
    static T convert(const YAML::Node& v, const std::string& where) {
        if (!v.IsScalar()) fail_at(v, where + ": expected a scalar");
        try {
            return v.as<T>();
        } catch (const YAML::Exception&) {
            fail_at(v, where + ": cannot read '" + v.Scalar() + "'");
        }
    }

    const YAML::Node& node() const { return node_; }

private:
    YAML::Node node_;
    std::string path_;
    std::vector<std::string>& defaults_;
};

void check_range(const YAML::Node& at, const std::string& where, double v, double lo, double hi) {
    if (!std::isfinite(v) || v < lo || v > hi)
        fail_at(at, where + " = " + format_number(v) + " is outside [" + format_number(lo) + ", " + format_number(hi) +
                        "]");
}

void check_positive(const YAML::Node& at, const std::string& where, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) fail_at(at, where + " must be positive");
}

AngleGrid parse_grid(const YAML::Node& node, const std::string& path, std::vector<std::string>& defaults) {
    const Section s(node, path, defaults, {"start_deg", "stop_deg", "count"});
    AngleGrid g;
    g.start_deg = s.require<double>("start_deg");
    g.stop_deg = s.require<double>("stop_deg");
    g.count = s.require<std::size_t>("count");
    if (g.count == 0) fail_at(node, path + ".count must be at least 1");
    if (g.count == 1 && g.stop_deg != g.start_deg) fail_at(node, path + ": a one-point grid needs start == stop");
    if (g.count > 1 && !(g.stop_deg > g.start_deg)) fail_at(node, path + ": grid must be increasing");
    return g;
}

cplx parse_complex(const YAML::Node& node, const std::string& where) {
    if (node.IsScalar()) return {Section::convert<double>(node, where), 0.0};
    if (!node.IsSequence() || node.size() != 2) fail_at(node, where + ": expected a number or [re, im]");
    return {Section::convert<double>(node[0], where), Section::convert<double>(node[1], where)};
}

Vec3 parse_vec3(const YAML::Node& node, const std::string& where) {
    if (!node.IsSequence() || node.size() != 3) fail_at(node, where + ": expected [x, y, z]");
    return {Section::convert<double>(node[0], where), Section::convert<double>(node[1], where),
            Section::convert<double>(node[2], where)};
}

GeometrySpec parse_geometry(const YAML::Node& node, std::vector<std::string>& defaults) {
    const Section top(node, "geometry", defaults, {"linear", "patch", "cells"});
    if (node.size() != 1) fail_at(node, "geometry: give exactly one of linear, patch, cells");

    if (top.has("linear")) {
        const Section s(top.child("linear"), "geometry.linear", defaults,
                        {"cells", "spacing", "a", "b", "area", "sampling"});
        LinearSpec g;
        g.cells = s.get<std::size_t>("cells", g.cells);
        g.spacing = s.get<double>("spacing", g.spacing);
        g.a = s.get<double>("a", g.a);
        g.b = s.get<double>("b", g.b);
        g.area = s.get<double>("area", g.area);
        const auto sampling = s.get<std::string>("sampling", "finite");
        if (sampling != "finite" && sampling != "unit")
            fail_at(s.child("sampling"), "geometry.linear.sampling must be 'finite' or 'unit'");
        g.unit_sampling = sampling == "unit";
        if (g.cells == 0) fail_at(s.node(), "geometry.linear.cells must be at least 1");
        check_positive(s.node(), "geometry.linear.spacing", g.spacing);
        check_positive(s.node(), "geometry.linear.a", g.a);
        check_positive(s.node(), "geometry.linear.b", g.b);
        check_positive(s.node(), "geometry.linear.area", g.area);
        return g;
    }
    if (top.has("patch")) {
        const Section s(top.child("patch"), "geometry.patch", defaults, {"a", "b", "area"});
        PatchSpec g;
        g.a = s.require<double>("a");
        g.b = s.require<double>("b");
        if (s.has("area")) g.area = s.require<double>("area");
        else defaults.push_back("geometry.patch.area");
        check_positive(s.node(), "geometry.patch.a", g.a);
        check_positive(s.node(), "geometry.patch.b", g.b);
        if (g.area) check_positive(s.node(), "geometry.patch.area", *g.area);
        return g;
    }
    const YAML::Node list = top.child("cells");
    if (!list.IsSequence() || list.size() == 0) fail_at(list, "geometry.cells: expected a non-empty list");
    std::vector<CellSpec> cells;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "geometry.cells[" + std::to_string(i) + "]";
        const Section s(list[i], path, defaults, {"position", "a", "b", "area", "phase_deg"});
        CellSpec c;
        if (!s.has("position")) fail_at(list[i], path + ": missing required key 'position'");
        c.position = parse_vec3(s.child("position"), path + ".position");
        c.a = s.get<double>("a", c.a);
        c.b = s.get<double>("b", c.b);
        c.area = s.get<double>("area", c.a * c.b);
        c.phase_deg = s.get<double>("phase_deg", 0.0);
        check_positive(list[i], path + ".a", c.a);
        check_positive(list[i], path + ".b", c.b);
        check_positive(list[i], path + ".area", c.area);
        cells.push_back(c);
    }
    return cells;
}

SchemeSpec parse_scheme(const YAML::Node& node, std::vector<std::string>& defaults) {
    const Section top(node, "configuration", defaults, {"none", "random", "compensate", "reshape"});
    if (node.size() != 1) fail_at(node, "configuration: give exactly one scheme");

    if (top.has("none")) return NoScheme{};
    if (top.has("random")) {
        const Section s(top.child("random"), "configuration.random", defaults, {"seed", "mode", "trials"});
        RandomScheme r;
        r.seed = s.get<std::uint64_t>("seed", r.seed);
        const auto mode = s.get<std::string>("mode", "expectation");
        if (mode == "expectation") r.mode = RandomScheme::Mode::expectation;
        else if (mode == "draw") r.mode = RandomScheme::Mode::draw;
        else if (mode == "monte_carlo") r.mode = RandomScheme::Mode::monte_carlo;
        else fail_at(s.child("mode"), "configuration.random.mode must be expectation, draw or monte_carlo");
        r.trials = s.get<std::size_t>("trials", r.trials);
        if (r.trials < 2) fail_at(s.node(), "configuration.random.trials must be at least 2");
        return r;
    }
    auto parse_pair = [&](const YAML::Node& n, const std::string& path) {
        const Section s(n, path, defaults, {"theta_i_deg", "theta_s_deg"});
        CompensateScheme c;
        c.theta_i_deg = s.require<double>("theta_i_deg");
        c.theta_s_deg = s.require<double>("theta_s_deg");
        check_range(n, path + ".theta_i_deg", c.theta_i_deg, -90.0, 90.0);
        check_range(n, path + ".theta_s_deg", c.theta_s_deg, -90.0, 90.0);
        return c;
    };
    if (top.has("compensate")) return parse_pair(top.child("compensate"), "configuration.compensate");

    const Section s(top.child("reshape"), "configuration.reshape", defaults,
                    {"desired_pattern_file", "desired_steering", "truncation_tol", "max_discarded_fraction",
                     "solve_on"});
    ReshapeScheme r;
    if (s.has("desired_pattern_file") == s.has("desired_steering"))
        fail_at(s.node(), "configuration.reshape: give exactly one of desired_pattern_file, desired_steering");
    if (s.has("desired_pattern_file")) r.desired_pattern_file = s.require<std::string>("desired_pattern_file");
    else r.desired_steering = parse_pair(s.child("desired_steering"), "configuration.reshape.desired_steering");
    r.truncation_tol = s.get<double>("truncation_tol", r.truncation_tol);
    r.max_discarded_fraction = s.get<double>("max_discarded_fraction", r.max_discarded_fraction);
    const auto grid = s.get<std::string>("solve_on", "dft");
    if (grid != "dft" && grid != "observation")
        fail_at(s.child("solve_on"), "configuration.reshape.solve_on must be 'dft' or 'observation'");
    r.solve_on_dft_grid = grid == "dft";
    if (!(r.truncation_tol >= 0.0)) fail_at(s.node(), "configuration.reshape.truncation_tol must be non-negative");
    if (!(r.max_discarded_fraction >= 0.0))
        fail_at(s.node(), "configuration.reshape.max_discarded_fraction must be non-negative");
    return r;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ScenarioError("malformed scenario: " + e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    if (!root.IsMap()) throw ScenarioError("scenario must be a mapping", 1, 1);

    Scenario scn;
    scn.base_dir = base_dir;
    auto& defaults = scn.defaults_filled;
    const Section top(root, "", defaults,
                      {"wave", "geometry", "incident", "observation", "configuration", "output"});

    if (top.has("wave")) {
        const Section s(top.child("wave"), "wave", defaults, {"wavelength", "reflection"});
        scn.wavelength = s.get<double>("wavelength", scn.wavelength);
        check_positive(s.node(), "wave.wavelength", scn.wavelength);
        if (s.has("reflection")) scn.reflection = parse_complex(s.child("reflection"), "wave.reflection");
        else defaults.push_back("wave.reflection");
    } else {
        defaults.push_back("wave.wavelength");
        defaults.push_back("wave.reflection");
    }

    if (!top.has("geometry")) throw ScenarioError("missing required section 'geometry'");
    scn.geometry = parse_geometry(top.child("geometry"), defaults);
    const bool linear = scn.is_linear();

    if (top.has("incident")) {
        const YAML::Node list = top.child("incident");
        if (!list.IsSequence()) fail_at(list, "incident: expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "incident[" + std::to_string(i) + "]";
            const Section s(list[i], path, defaults,
                            linear ? std::initializer_list<std::string_view>{"theta_deg", "amplitude"}
                                   : std::initializer_list<std::string_view>{"theta_deg", "phi_deg", "amplitude"});
            IncidentSpec w;
            w.theta_deg = s.require<double>("theta_deg");
            if (!linear) w.phi_deg = s.get<double>("phi_deg", 0.0);
            w.amplitude = s.get<double>("amplitude", 1.0);
            if (linear) check_range(list[i], path + ".theta_deg", w.theta_deg, -90.0, 90.0);
            else check_range(list[i], path + ".theta_deg", w.theta_deg, 0.0, 180.0);
            if (!std::isfinite(w.phi_deg) || !std::isfinite(w.amplitude) || w.amplitude < 0.0)
                fail_at(list[i], path + ": phi_deg must be finite and amplitude non-negative");
            scn.incident.push_back(w);
        }
    } else {
        defaults.push_back("incident");
    }

    if (!top.has("observation")) throw ScenarioError("missing required section 'observation'");
    {
        const YAML::Node node = top.child("observation");
        const Section s(node, "observation", defaults,
                        linear ? std::initializer_list<std::string_view>{"radius", "grid", "points_deg"}
                               : std::initializer_list<std::string_view>{"radius", "grid", "points_deg", "phi_deg",
                                                                         "phi_grid"});
        ObservationSpec& o = scn.observation;
        o.radius = s.get<double>("radius", o.radius);
        check_positive(node, "observation.radius", o.radius);
        if (s.has("grid") == s.has("points_deg"))
            fail_at(node, "observation: give exactly one of grid, points_deg");
        if (s.has("grid")) {
            o.grid = parse_grid(s.child("grid"), "observation.grid", defaults);
        } else {
            const YAML::Node pts = s.child("points_deg");
            if (!pts.IsSequence() || pts.size() == 0) fail_at(pts, "observation.points_deg: expected a non-empty list");
            for (const auto& p : pts) o.points_deg.push_back(Section::convert<double>(p, "observation.points_deg"));
        }
        const double lo = linear ? -90.0 : -180.0, hi = linear ? 90.0 : 180.0;
        for (double t : o.theta_values()) check_range(node, "observation angle", t, lo, hi);
        if (!linear) {
            if (s.has("phi_grid")) {
                if (s.has("phi_deg")) fail_at(node, "observation: give at most one of phi_deg, phi_grid");
                o.phi_grid = parse_grid(s.child("phi_grid"), "observation.phi_grid", defaults);
            } else {
                o.phi_deg = s.get<double>("phi_deg", 0.0);
            }
        }
    }

    if (top.has("configuration")) {
        scn.scheme = parse_scheme(top.child("configuration"), defaults);
        if (!linear && !std::holds_alternative<NoScheme>(scn.scheme))
            fail_at(top.child("configuration"), "configuration schemes apply to linear geometries only");
    } else {
        defaults.push_back("configuration");
    }

    if (top.has("output")) {
        const Section s(top.child("output"), "output", defaults, {"format", "path"});
        scn.output.format = s.get<std::string>("format", scn.output.format);
        if (scn.output.format != "csv" && scn.output.format != "json")
            fail_at(s.child("format"), "output.format must be csv or json");
        scn.output.path = s.get<std::string>("path", "");
    } else {
        defaults.push_back("output");
    }
    return scn;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), file.parent_path());
}

// -------------------------------------------------------------- canonical ---

namespace {

nlohmann::json grid_json(const AngleGrid& g) {
    return {{"start_deg", g.start_deg}, {"stop_deg", g.stop_deg}, {"count", g.count}};
}

nlohmann::json pair_json(const CompensateScheme& c) {
    return {{"theta_i_deg", c.theta_i_deg}, {"theta_s_deg", c.theta_s_deg}};
}

struct SchemeJson {
    nlohmann::json operator()(const NoScheme&) const { return {{"none", nlohmann::json::object()}}; }
    nlohmann::json operator()(const RandomScheme& r) const {
        static const char* modes[] = {"expectation", "draw", "monte_carlo"};
        return {{"random", {{"seed", r.seed}, {"mode", modes[static_cast<int>(r.mode)]}, {"trials", r.trials}}}};
    }
    nlohmann::json operator()(const CompensateScheme& c) const { return {{"compensate", pair_json(c)}}; }
    nlohmann::json operator()(const ReshapeScheme& r) const {
        nlohmann::json j{{"truncation_tol", r.truncation_tol},
                         {"max_discarded_fraction", r.max_discarded_fraction},
                         {"solve_on", r.solve_on_dft_grid ? "dft" : "observation"}};
        if (r.desired_steering) j["desired_steering"] = pair_json(*r.desired_steering);
        else j["desired_pattern_file"] = r.desired_pattern_file;
        return {{"reshape", j}};
    }
};

struct GeometryJson {
    nlohmann::json operator()(const PatchSpec& p) const {
        return {{"patch", {{"a", p.a}, {"b", p.b}, {"area", p.area.value_or(p.a * p.b)}}}};
    }
    nlohmann::json operator()(const std::vector<CellSpec>& cells) const {
        auto list = nlohmann::json::array();
        for (const auto& c : cells)
            list.push_back({{"position", c.position}, {"a", c.a}, {"b", c.b}, {"area", c.area},
                            {"phase_deg", c.phase_deg}});
        return {{"cells", list}};
    }
    nlohmann::json operator()(const LinearSpec& g) const {
        return {{"linear",
                 {{"cells", g.cells},
                  {"spacing", g.spacing},
                  {"a", g.a},
                  {"b", g.b},
                  {"area", g.area},
                  {"sampling", g.unit_sampling ? "unit" : "finite"}}}};
    }
};

}  // namespace

nlohmann::json scenario_to_json(const Scenario& scn) {
    nlohmann::json j;
    j["wave"] = {{"wavelength", scn.wavelength}, {"reflection", {scn.reflection.real(), scn.reflection.imag()}}};
    j["geometry"] = std::visit(GeometryJson{}, scn.geometry);
    auto inc = nlohmann::json::array();
    for (const auto& w : scn.incident) {
        nlohmann::json e{{"theta_deg", w.theta_deg}, {"amplitude", w.amplitude}};
        if (!scn.is_linear()) e["phi_deg"] = w.phi_deg;
        inc.push_back(e);
    }
    j["incident"] = inc;
    nlohmann::json obs{{"radius", scn.observation.radius}};
    if (scn.observation.grid) obs["grid"] = grid_json(*scn.observation.grid);
    else obs["points_deg"] = scn.observation.points_deg;
    if (!scn.is_linear()) {
        if (scn.observation.phi_grid) obs["phi_grid"] = grid_json(*scn.observation.phi_grid);
        else obs["phi_deg"] = scn.observation.phi_deg;
    }
    j["observation"] = obs;
    j["configuration"] = std::visit(SchemeJson{}, scn.scheme);
    j["output"] = {{"format", scn.output.format}, {"path", scn.output.path}};
    return j;
}

std::string scenario_hash(const Scenario& scn) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scenario_to_json(scn).dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------------ model ---

namespace {

const LinearSpec& linear_spec(const Scenario& scn) {
    if (!scn.is_linear()) throw ValidationError("this operation needs a linear geometry");
    return std::get<LinearSpec>(scn.geometry);
}

LinearRis base_linear_ris(const Scenario& scn) {
    const LinearSpec& g = linear_spec(scn);
    const LinearCell cell{g.area, g.unit_sampling ? 0.0 : g.b, 0.0};
    return LinearRis(g.cells, g.spacing, cell, scn.context());
}

std::vector<LinearWave> linear_waves(const Scenario& scn) {
    std::vector<LinearWave> out;
    for (const auto& w : scn.incident) out.push_back({deg_to_rad(w.theta_deg), w.amplitude});
    return out;
}

std::vector<double> split_csv_line(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
        out.push_back(v);
    }
    return out;
}

Eigen::VectorXcd read_desired_pattern(const std::filesystem::path& file, const std::vector<double>& angles_rad) {
    std::ifstream in(file);
    if (!in) throw ScenarioError("cannot open desired pattern file " + file.string());
    std::vector<std::array<double, 3>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && line.rfind("theta_deg", 0) == 0) continue;
        std::vector<double> v;
        try {
            v = split_csv_line(line);
        } catch (const std::exception&) {
            throw ScenarioError(file.string() + ": unreadable number", lineno, 1);
        }
        if (v.size() != 3) throw ScenarioError(file.string() + ": expected theta_deg,re,im", lineno, 1);
        rows.push_back({v[0], v[1], v[2]});
    }
    if (rows.size() != angles_rad.size())
        throw DimensionError("desired pattern has " + std::to_string(rows.size()) + " rows, solve grid has " +
                             std::to_string(angles_rad.size()) + " points");
    Eigen::VectorXcd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::abs(rows[i][0] - rad_to_deg(angles_rad[i])) > 1e-6)
            throw ScenarioError(file.string() + ": row angle " + format_number(rows[i][0]) +
                                " does not match solve grid angle " + format_number(rad_to_deg(angles_rad[i])));
        out[static_cast<Eigen::Index>(i)] = {rows[i][1], rows[i][2]};
    }
    return out;
}

}  // namespace

ReshapeRun run_reshape(const Scenario& scn) {
    const auto* scheme = std::get_if<ReshapeScheme>(&scn.scheme);
    if (!scheme) throw ValidationError("scenario has no reshape configuration");
    if (scn.incident.empty()) throw ValidationError("reshape needs at least one incident wave");
    const LinearRis ris = base_linear_ris(scn);

    std::vector<double> angles;
    if (scheme->solve_on_dft_grid) {
        angles = dft_grid_angles(ris.size());
    } else {
        for (double t : scn.observation.theta_values()) angles.push_back(deg_to_rad(t));
    }
    std::vector<LinearObservation> obs;
    for (double t : angles) obs.push_back({scn.observation.radius, t});

    std::vector<double> incident_angles;
    Eigen::VectorXcd incident(static_cast<Eigen::Index>(scn.incident.size()));
    for (std::size_t m = 0; m < scn.incident.size(); ++m) {
        incident_angles.push_back(deg_to_rad(scn.incident[m].theta_deg));
        incident[static_cast<Eigen::Index>(m)] = scn.incident[m].amplitude;
    }
    MimoSystem sys = assemble_mimo(ris, incident_angles, obs);

    Eigen::VectorXcd desired;
    if (scheme->desired_steering) {
        const CompensateScheme& pair = *scheme->desired_steering;
        const auto it = std::find_if(scn.incident.begin(), scn.incident.end(), [&](const IncidentSpec& w) {
            return std::abs(w.theta_deg - pair.theta_i_deg) <= 1e-9;
        });
        if (it == scn.incident.end())
            throw ValidationError("reshape desired_steering.theta_i_deg must match an incident wave");
        const double ti = deg_to_rad(pair.theta_i_deg);
        const LinearRis baseline = ris.with_phases(phase_compensation(ti, deg_to_rad(pair.theta_s_deg), ris));
        const MimoSystem alone = assemble_mimo(baseline, std::span(&ti, 1), obs);
        desired = apply_mimo(alone, Eigen::VectorXcd::Constant(1, it->amplitude));
    } else {
        std::filesystem::path file = scheme->desired_pattern_file;
        if (file.is_relative()) file = scn.base_dir / file;
        desired = read_desired_pattern(file, angles);
    }

    ReshapeOptions opts;
    opts.truncation_tol = scheme->truncation_tol;
    opts.max_discarded_fraction = scheme->max_discarded_fraction;
    ReshapeSolution sol = beam_reshape(sys, incident, desired, opts);
    return {std::move(sys), std::move(incident), std::move(desired), std::move(sol)};
}

LinearRis configured_linear_ris(const Scenario& scn) {
    const LinearRis ris = base_linear_ris(scn);
    if (const auto* c = std::get_if<CompensateScheme>(&scn.scheme))
        return ris.with_phases(phase_compensation(deg_to_rad(c->theta_i_deg), deg_to_rad(c->theta_s_deg), ris));
    if (const auto* r = std::get_if<RandomScheme>(&scn.scheme)) {
        if (r->mode == RandomScheme::Mode::draw) return ris.with_phases(random_phase_draw(ris.size(), r->seed));
        return ris;
    }
    if (std::holds_alternative<ReshapeScheme>(scn.scheme)) {
        const ReshapeRun run = run_reshape(scn);
        const Eigen::VectorXcd& w = run.solution.weights;
        return ris.with_weights(std::span<const cplx>(w.data(), static_cast<std::size_t>(w.size())));
    }
    return ris;
}

MimoSystem scenario_mimo(const Scenario& scn) {
    const LinearRis ris = configured_linear_ris(scn);
    std::vector<double> angles;
    for (const auto& w : scn.incident) angles.push_back(deg_to_rad(w.theta_deg));
    std::vector<LinearObservation> obs;
    for (double t : scn.observation.theta_values()) obs.push_back({scn.observation.radius, deg_to_rad(t)});
    return assemble_mimo(ris, angles, obs);
}

double mimo_sampling_discrepancy(const Scenario& scn) {
    const LinearRis ris = configured_linear_ris(scn);
    const MimoSystem sys = scenario_mimo(scn);
    Eigen::VectorXcd amps(static_cast<Eigen::Index>(scn.incident.size()));
    for (std::size_t m = 0; m < scn.incident.size(); ++m) amps[static_cast<Eigen::Index>(m)] = scn.incident[m].amplitude;
    const Eigen::VectorXcd model = apply_mimo(sys, amps);
    const std::vector<LinearWave> waves = linear_waves(scn);
    double worst = 0.0;
    for (std::size_t t = 0; t < sys.outputs(); ++t) {
        const cplx direct = linear_field_multi(ris, waves, {sys.radii()[t], sys.scatter_angles()[t]});
        worst = std::max(worst, std::abs(direct - model[static_cast<Eigen::Index>(t)]));
    }
    const double scale = model.cwiseAbs().maxCoeff();
    return scale > 0.0 ? worst / scale : worst;
}

// ------------------------------------------------------------------ sweep ---

namespace {

/// Observation direction for a signed θ: negative θ is read as the mirror
/// half-plane, (|θ|, φ + π).
Direction signed_direction(double theta_deg, double phi_deg) {
    if (theta_deg < 0.0) return {deg_to_rad(-theta_deg), deg_to_rad(phi_deg + 180.0)};
    return {deg_to_rad(theta_deg), deg_to_rad(phi_deg)};
}

}  // namespace

SweepResult run_sweep(const Scenario& scn, unsigned threads) {
    const std::vector<double> thetas = scn.observation.theta_values();
    const std::vector<double> phis = scn.observation.phi_values();
    const double r = scn.observation.radius;
    const WaveContext ctx = scn.context();

    SweepResult result;
    result.has_phi = !scn.is_linear();
    result.rows.resize(thetas.size() * phis.size());
    for (std::size_t p = 0; p < phis.size(); ++p)
        for (std::size_t t = 0; t < thetas.size(); ++t)
            result.rows[p * thetas.size() + t] = {thetas[t], phis[p]};

    double incident_power = 0.0;
    for (const auto& w : scn.incident) incident_power += w.amplitude * w.amplitude;

    std::vector<double> power(result.rows.size(), 0.0);
    auto each_point = [&](auto&& fn) {
        parallel_for(result.rows.size(), threads, [&](std::size_t i) { power[i] = fn(result.rows[i]); });
    };

    std::vector<PlaneWave> waves;
    if (!scn.is_linear())
        for (const auto& w : scn.incident)
            waves.push_back({{deg_to_rad(w.theta_deg), deg_to_rad(w.phi_deg)}, w.amplitude});

    if (const auto* pspec = std::get_if<PatchSpec>(&scn.geometry)) {
        const Patch patch(pspec->a, pspec->b, pspec->area.value_or(pspec->a * pspec->b));
        if (!waves.empty())
            each_point([&](const SweepRow& row) {
                const ObservationPoint obs{r, signed_direction(row.theta_deg, row.phi_deg)};
                const double m = patch_scattered_field_multi(patch, waves, obs, ctx).magnitude();
                return m * m;
            });
    } else if (const auto* cells = std::get_if<std::vector<CellSpec>>(&scn.geometry)) {
        std::vector<UnitCell> unit;
        for (const auto& c : *cells) unit.push_back({c.position, c.a, c.b, c.area, deg_to_rad(c.phase_deg)});
        const RisGeometry ris(std::move(unit), ctx);
        if (!waves.empty())
            each_point([&](const SweepRow& row) {
                const ObservationPoint obs{r, signed_direction(row.theta_deg, row.phi_deg)};
                const double m = ris_scattered_field_multi(ris, waves, obs).magnitude();
                return m * m;
            });
    } else {
        const std::vector<LinearWave> lw = linear_waves(scn);
        const auto* random = std::get_if<RandomScheme>(&scn.scheme);
        if (random && random->mode == RandomScheme::Mode::expectation) {
            const LinearRis ris = base_linear_ris(scn);
            each_point([&](const SweepRow& row) {
                return random_phase_expected_power_multi(ris, lw, {r, deg_to_rad(row.theta_deg)});
            });
        } else if (random && random->mode == RandomScheme::Mode::monte_carlo) {
            const LinearRis ris = base_linear_ris(scn);
            std::vector<LinearObservation> obs;
            for (const auto& row : result.rows) obs.push_back({r, deg_to_rad(row.theta_deg)});
            const auto mc = random_phase_monte_carlo(ris, lw, obs, random->trials, random->seed, threads);
            for (std::size_t i = 0; i < mc.size(); ++i) power[i] = mc[i].mean;
        } else {
            const LinearRis ris = configured_linear_ris(scn);
            each_point([&](const SweepRow& row) {
                return std::norm(linear_field_multi(ris, lw, {r, deg_to_rad(row.theta_deg)}));
            });
        }
    }

    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        SweepRow& row = result.rows[i];
        row.field = std::sqrt(power[i]);
        row.field_db = 20.0 * std::log10(row.field);
        row.rcs = incident_power > 0.0 ? 4.0 * kPi * r * r * power[i] / incident_power : 0.0;
        row.rcs_db = 10.0 * std::log10(row.rcs);
    }
    return result;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << (result.has_phi ? "theta_deg,phi_deg,field,field_db,rcs,rcs_db\n" : "theta_deg,field,field_db,rcs,rcs_db\n");
    for (const auto& row : result.rows) {
        out << format_number(row.theta_deg) << ',';
        if (result.has_phi) out << format_number(row.phi_deg) << ',';
        out << format_number(row.field) << ',' << format_number(row.field_db) << ',' << format_number(row.rcs) << ','
            << format_number(row.rcs_db) << '\n';
    }
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json sweep_to_json(const SweepResult& result) {
    auto rows = nlohmann::json::array();
    for (const auto& row : result.rows) {
        nlohmann::json j{{"theta_deg", row.theta_deg},
                         {"field", row.field},
                         {"field_db", finite_or_null(row.field_db)},
                         {"rcs", row.rcs},
                         {"rcs_db", finite_or_null(row.rcs_db)}};
        if (result.has_phi) j["phi_deg"] = row.phi_deg;
        rows.push_back(j);
    }
    return {{"rows", rows}};
}

void write_weights_csv(const LinearRis& ris, std::ostream& out) {
    out << "index,area,phase_deg,weight_re,weight_im\n";
    for (std::size_t n = 0; n < ris.size(); ++n) {
        const LinearCell& c = ris.cells()[n];
        const cplx w = std::polar(c.area, c.phase);
        out << n << ',' << format_number(c.area) << ',' << format_number(rad_to_deg(c.phase)) << ','
            << format_number(w.real()) << ',' << format_number(w.imag()) << '\n';
    }
}

nlohmann::json weights_to_json(const LinearRis& ris) {
    auto cells = nlohmann::json::array();
    for (std::size_t n = 0; n < ris.size(); ++n) {
        const LinearCell& c = ris.cells()[n];
        cells.push_back({{"index", n}, {"area", c.area}, {"phase_deg", rad_to_deg(c.phase)}});
    }
    return {{"spacing", ris.spacing()}, {"wavelength", ris.context().wavelength()}, {"cells", cells}};
}

}  // namespace risem
