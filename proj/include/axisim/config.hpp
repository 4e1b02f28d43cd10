#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "axisim/coupled_solver.hpp"
#include "axisim/mesh.hpp"

namespace axisim {

// ---------------------------------------------------------------------------
// Scenario configuration: flat dotted-path `key = value` lines, `#` comments.
// `scenario = paper_test` loads the built-in validation scenario; later keys
// override individual entries. Unknown keys are rejected; syntax errors
// carry line numbers and semantic errors carry key paths.
// ---------------------------------------------------------------------------

struct PortConfig {
    int k = 1;
    bool current = true;
    double re = 0.0, im = 0.0;
    bool operator==(const PortConfig&) const = default;
};

struct ScenarioConfig {
    std::string scenario; // "", or "paper_test"

    double R = 0.02875, L = 0.165;
    int nr = 16, nz = 32;
    std::string mesh_file;

    std::string field = "zero"; // zero | radial_stretch | paper_test
    double stretch_c = 0.0;
    std::string ramp = "constant"; // linear | constant
    double ramp_T = 20.0;
    double ramp_value = 1.0;

    std::map<std::string, double> material_overrides;

    std::vector<PortConfig> ports;
    std::optional<double> frequency_hz;

    double theta0 = 20.0;
    double convrad_h = 0.0, convrad_eps = 0.0;
    double convrad_theta_conv = 20.0, convrad_theta_rad = 20.0;
    std::optional<double> dirichlet_value;

    double dt = 0.1, t_end = 20.0;
    double newton_tol = 1e-8;
    int newton_max_iter = 25;
    std::string mode = "lagrangian"; // lagrangian | eulerian

    std::string out_directory = "out";
    int vtk_every_n_steps = 0; // 0 disables field output
    std::string csv = "timeseries.csv";

    bool operator==(const ScenarioConfig&) const = default;
};

inline ScenarioConfig paper_test_config() {
    ScenarioConfig c;
    c.scenario = "paper_test";
    c.R = 0.02875;
    c.L = 0.165;
    c.nr = 48;
    c.nz = 96;
    c.field = "paper_test";
    c.ramp = "linear";
    c.ramp_T = 20.0;
    c.ports = {PortConfig{1, true, 35000.0, 0.0}};
    c.frequency_hz = 500.0;
    c.theta0 = 20.0;
    c.convrad_h = 0.0;
    c.convrad_eps = 0.0;
    c.dt = 0.1;
    c.t_end = 20.0;
    return c;
}

namespace detail {

inline const std::vector<std::string>& material_keys() {
    static const std::vector<std::string> keys = {
        "sigma.c0", "sigma.c1", "sigma.c2", "sigma.constant",
        "k.c0", "k.c1", "k.c2", "k.c3", "k.c4", "k.constant",
        "cp.a1", "cp.c1", "cp.w1", "cp.a2", "cp.c2", "cp.w2", "cp.a3", "cp.c3", "cp.w3", "cp.constant",
        "rho0", "mu.a", "mu.b", "mu.theta_curie", "mu.theta_room", "mu.constant"};
    return keys;
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error(key + ": expected a number, got '" + value + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& value) {
    double v = parse_double(key, value);
    if (v != std::floor(v)) throw config_error(key + ": expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

} // namespace detail

inline void apply_config_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_double;
    using detail::parse_int;
    auto is = [&](const char* k) { return key == k; };

    if (is("scenario")) {
        if (value != "paper_test") throw config_error("scenario: unknown preset '" + value + "'");
        c = paper_test_config();
        return;
    }
    if (is("geometry.R")) { c.R = parse_double(key, value); return; }
    if (is("geometry.L")) { c.L = parse_double(key, value); return; }
    if (is("geometry.nr")) { c.nr = parse_int(key, value); return; }
    if (is("geometry.nz")) { c.nz = parse_int(key, value); return; }
    if (is("geometry.mesh_file")) { c.mesh_file = value; return; }
    if (is("motion.field")) {
        if (value != "zero" && value != "radial_stretch" && value != "paper_test")
            throw config_error("motion.field: expected zero|radial_stretch|paper_test");
        c.field = value;
        return;
    }
    if (is("motion.stretch_c")) { c.stretch_c = parse_double(key, value); return; }
    if (is("motion.ramp")) {
        if (value != "linear" && value != "constant") throw config_error("motion.ramp: expected linear|constant");
        c.ramp = value;
        return;
    }
    if (is("motion.ramp_T")) { c.ramp_T = parse_double(key, value); return; }
    if (is("motion.ramp_value")) { c.ramp_value = parse_double(key, value); return; }
    if (key.rfind("material.", 0) == 0) {
        const std::string mkey = key.substr(9);
        for (const auto& k : detail::material_keys())
            if (k == mkey) {
                c.material_overrides[mkey] = parse_double(key, value);
                return;
            }
        throw config_error("unknown material coefficient '" + key + "'");
    }
    if (key.rfind("port.", 0) == 0) {
        size_t dot = key.find('.', 5);
        if (dot == std::string::npos) throw config_error("bad port key '" + key + "'");
        int k = 0;
        try {
            k = std::stoi(key.substr(5, dot - 5));
        } catch (const std::exception&) {
            throw config_error("bad port index in '" + key + "'");
        }
        if (k < 1) throw config_error(key + ": port index must be >= 1");
        PortConfig* p = nullptr;
        for (auto& q : c.ports)
            if (q.k == k) p = &q;
        if (!p) {
            c.ports.push_back(PortConfig{k, true, 0.0, 0.0});
            p = &c.ports.back();
        }
        const std::string field = key.substr(dot + 1);
        if (field == "drive") {
            if (value != "current" && value != "voltage") throw config_error(key + ": expected current|voltage");
            p->current = value == "current";
        } else if (field == "re") {
            p->re = parse_double(key, value);
        } else if (field == "im") {
            p->im = parse_double(key, value);
        } else {
            throw config_error("unknown port key '" + key + "'");
        }
        return;
    }
    if (is("source.frequency_hz")) { c.frequency_hz = parse_double(key, value); return; }
    if (is("thermal.theta0")) { c.theta0 = parse_double(key, value); return; }
    if (is("thermal.convrad.h")) { c.convrad_h = parse_double(key, value); return; }
    if (is("thermal.convrad.epsilon")) { c.convrad_eps = parse_double(key, value); return; }
    if (is("thermal.convrad.theta_conv")) { c.convrad_theta_conv = parse_double(key, value); return; }
    if (is("thermal.convrad.theta_rad")) { c.convrad_theta_rad = parse_double(key, value); return; }
    if (is("thermal.dirichlet.value")) { c.dirichlet_value = parse_double(key, value); return; }
    if (is("solver.dt")) { c.dt = parse_double(key, value); return; }
    if (is("solver.t_end")) { c.t_end = parse_double(key, value); return; }
    if (is("solver.newton_tol")) { c.newton_tol = parse_double(key, value); return; }
    if (is("solver.newton_max_iter")) { c.newton_max_iter = parse_int(key, value); return; }
    if (is("solver.mode")) {
        if (value != "lagrangian" && value != "eulerian") throw config_error("solver.mode: expected lagrangian|eulerian");
        c.mode = value;
        return;
    }
    if (is("output.directory")) { c.out_directory = value; return; }
    if (is("output.vtk_every_n_steps")) { c.vtk_every_n_steps = parse_int(key, value); return; }
    if (is("output.csv")) { c.csv = value; return; }
    throw config_error("unknown key '" + key + "'");
}

inline void validate_config(const ScenarioConfig& c) {
    if (c.mesh_file.empty()) {
        if (!(c.R > 0.0) || !(c.L > 0.0)) throw config_error("geometry.R/geometry.L must be positive");
        if (c.nr < 1 || c.nz < 1) throw config_error("geometry.nr/geometry.nz must be >= 1");
    }
    if (c.field == "radial_stretch" && c.stretch_c <= -1.0)
        throw config_error("motion.stretch_c must be > -1");
    if (c.ramp == "linear" && !(c.ramp_T > 0.0)) throw config_error("motion.ramp_T must be positive");
    if (!c.ports.empty() && !c.frequency_hz)
        throw config_error("source.frequency_hz is required when ports are driven");
    if (c.frequency_hz && !(*c.frequency_hz > 0.0)) throw config_error("source.frequency_hz must be positive");
    if (c.convrad_h < 0.0) throw config_error("thermal.convrad.h must be >= 0");
    if (c.convrad_eps < 0.0 || c.convrad_eps > 1.0) throw config_error("thermal.convrad.epsilon must be in [0,1]");
    if (!(c.dt > 0.0)) throw config_error("solver.dt must be positive");
    if (c.t_end < 0.0) throw config_error("solver.t_end must be >= 0");
    if (!(c.newton_tol > 0.0)) throw config_error("solver.newton_tol must be positive");
    if (c.newton_max_iter < 1) throw config_error("solver.newton_max_iter must be >= 1");
    for (const auto& p : c.ports) {
        if (!std::isfinite(p.re) || !std::isfinite(p.im))
            throw config_error("port." + std::to_string(p.k) + ": amplitude must be finite");
    }
    if (c.vtk_every_n_steps < 0) throw config_error("output.vtk_every_n_steps must be >= 0");
}

inline ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
        try {
            apply_config_key(c, key, value);
        } catch (const config_error& e) {
            throw config_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    std::sort(c.ports.begin(), c.ports.end(), [](const PortConfig& a, const PortConfig& b) { return a.k < b.k; });
    validate_config(c);
    return c;
}

inline std::string print_config(const ScenarioConfig& c) {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    if (!c.scenario.empty()) os << "scenario = " << c.scenario << "\n";
    os << "geometry.R = " << num(c.R) << "\n";
    os << "geometry.L = " << num(c.L) << "\n";
    os << "geometry.nr = " << c.nr << "\n";
    os << "geometry.nz = " << c.nz << "\n";
    if (!c.mesh_file.empty()) os << "geometry.mesh_file = " << c.mesh_file << "\n";
    os << "motion.field = " << c.field << "\n";
    os << "motion.stretch_c = " << num(c.stretch_c) << "\n";
    os << "motion.ramp = " << c.ramp << "\n";
    os << "motion.ramp_T = " << num(c.ramp_T) << "\n";
    os << "motion.ramp_value = " << num(c.ramp_value) << "\n";
    for (const auto& [k, v] : c.material_overrides) os << "material." << k << " = " << num(v) << "\n";
    for (const auto& p : c.ports) {
        os << "port." << p.k << ".drive = " << (p.current ? "current" : "voltage") << "\n";
        os << "port." << p.k << ".re = " << num(p.re) << "\n";
        os << "port." << p.k << ".im = " << num(p.im) << "\n";
    }
    if (c.frequency_hz) os << "source.frequency_hz = " << num(*c.frequency_hz) << "\n";
    os << "thermal.theta0 = " << num(c.theta0) << "\n";
    os << "thermal.convrad.h = " << num(c.convrad_h) << "\n";
    os << "thermal.convrad.epsilon = " << num(c.convrad_eps) << "\n";
    os << "thermal.convrad.theta_conv = " << num(c.convrad_theta_conv) << "\n";
    os << "thermal.convrad.theta_rad = " << num(c.convrad_theta_rad) << "\n";
    if (c.dirichlet_value) os << "thermal.dirichlet.value = " << num(*c.dirichlet_value) << "\n";
    os << "solver.dt = " << num(c.dt) << "\n";
    os << "solver.t_end = " << num(c.t_end) << "\n";
    os << "solver.newton_tol = " << num(c.newton_tol) << "\n";
    os << "solver.newton_max_iter = " << c.newton_max_iter << "\n";
    os << "solver.mode = " << c.mode << "\n";
    os << "output.directory = " << c.out_directory << "\n";
    os << "output.vtk_every_n_steps = " << c.vtk_every_n_steps << "\n";
    os << "output.csv = " << c.csv << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Scenario construction
// ---------------------------------------------------------------------------

inline MaterialModel build_materials(const ScenarioConfig& c) {
    MaterialModel m = paper_steel();
    for (const auto& [k, v] : c.material_overrides) {
        if (k == "sigma.c0") m.sigma_c0 = v;
        else if (k == "sigma.c1") m.sigma_c1 = v;
        else if (k == "sigma.c2") m.sigma_c2 = v;
        else if (k == "sigma.constant") { m.sigma_constant = true; m.sigma_value = v; }
        else if (k == "k.c0") m.k_c0 = v;
        else if (k == "k.c1") m.k_c1 = v;
        else if (k == "k.c2") m.k_c2 = v;
        else if (k == "k.c3") m.k_c3 = v;
        else if (k == "k.c4") m.k_c4 = v;
        else if (k == "k.constant") { m.k_constant = true; m.k_value = v; }
        else if (k == "cp.a1") m.cp_a1 = v;
        else if (k == "cp.c1") m.cp_c1 = v;
        else if (k == "cp.w1") m.cp_w1 = v;
        else if (k == "cp.a2") m.cp_a2 = v;
        else if (k == "cp.c2") m.cp_c2 = v;
        else if (k == "cp.w2") m.cp_w2 = v;
        else if (k == "cp.a3") m.cp_a3 = v;
        else if (k == "cp.c3") m.cp_c3 = v;
        else if (k == "cp.w3") m.cp_w3 = v;
        else if (k == "cp.constant") { m.cp_constant = true; m.cp_value = v; }
        else if (k == "rho0") m.rho0 = v;
        else if (k == "mu.a") m.mu_a = v;
        else if (k == "mu.b") m.mu_b = v;
        else if (k == "mu.theta_curie") m.theta_curie = v;
        else if (k == "mu.theta_room") m.theta_room = v;
        else if (k == "mu.constant") { m.mu_constant = true; m.mu_value = v; }
    }
    return m;
}

inline DisplacementField build_motion(const ScenarioConfig& c) {
    RampSchedule ramp = c.ramp == "linear" ? RampSchedule::linear(c.ramp_T) : RampSchedule::constant(c.ramp_value);
    if (c.field == "zero") return zero_field();
    if (c.field == "radial_stretch") return radial_stretch_field(c.stretch_c, ramp);
    return paper_test_field(ramp);
}

inline CoupledProblem build_problem(const ScenarioConfig& c) {
    CoupledProblem p;
    p.mesh = c.mesh_file.empty() ? generate_rectangle_mesh(c.R, c.L, c.nr, c.nz) : read_mesh_file(c.mesh_file);
    p.motion = build_motion(c);
    p.materials = build_materials(c);
    for (const auto& pc : c.ports)
        p.ports.ports.push_back(Port{pc.k, pc.current, Complex(pc.re, pc.im)});
    p.omega = 2.0 * M_PI * c.frequency_hz.value_or(500.0);
    p.thermal.convrad = ConvRadSpec{c.convrad_h, c.convrad_eps, c.convrad_theta_conv, c.convrad_theta_rad};
    if (c.dirichlet_value) {
        const double v = *c.dirichlet_value;
        p.thermal.dirichlet = [v](const Vec2&, double) { return v; };
    }
    p.theta0 = c.theta0;
    return p;
}

inline SolverConfig build_solver_config(const ScenarioConfig& c) {
    SolverConfig s;
    s.dt = c.dt;
    s.t_end = c.t_end;
    s.newton_tol = c.newton_tol;
    s.newton_max_iter = c.newton_max_iter;
    s.mode = c.mode == "eulerian" ? Mode::Eulerian : Mode::Lagrangian;
    return s;
}

} // namespace axisim
