#include "stshapeopt/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value)
{
    std::string s = value;
    for (char& c : s) {
        if (c == ',') {
            c = ' ';
        }
    }
    std::istringstream in(s);
    std::vector<std::string> items;
    std::string item;
    while (in >> item) {
        items.push_back(item);
    }
    return items;
}

double to_double(const std::string& s, int line)
{
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("'" + s + "' is not a finite number", line);
    }
    return v;
}

int to_int(const std::string& s, int line)
{
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE || v < -1000000000L || v > 1000000000L) {
        throw ConfigError("'" + s + "' is not an integer", line);
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string& s, int line)
{
    if (s == "true" || s == "on" || s == "yes" || s == "1") {
        return true;
    }
    if (s == "false" || s == "off" || s == "no" || s == "0") {
        return false;
    }
    throw ConfigError("'" + s + "' is not a boolean", line);
}

std::vector<double> to_doubles(const std::string& s, int line)
{
    std::vector<double> v;
    for (const auto& item : split_list(s)) {
        v.push_back(to_double(item, line));
    }
    return v;
}

Expression to_expression(const std::string& s, std::vector<std::string> vars, int line)
{
    try {
        return Expression::parse(s, std::move(vars));
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), line);
    }
}

/** @brief One of the listed words, or a ConfigError naming the choices. */
template <typename T>
T to_choice(const std::string& s, const std::vector<std::pair<std::string, T>>& choices, int line)
{
    std::string names;
    for (const auto& [name, value] : choices) {
        if (s == name) {
            return value;
        }
        names += (names.empty() ? "" : ", ") + name;
    }
    throw ConfigError("'" + s + "' is not one of " + names, line);
}

ReluctivityLaw to_reluctivity(const std::string& s, int line)
{
    const auto items = split_list(s);
    try {
        if (items.size() == 1) {
            return ReluctivityLaw::constant(to_double(items[0], line));
        }
        if (items.size() == 2 && items[0] == "constant") {
            return ReluctivityLaw::constant(to_double(items[1], line));
        }
        if (items.size() == 5 && items[0] == "curve") {
            return ReluctivityLaw::curve(to_double(items[1], line), to_double(items[2], line),
                                         to_double(items[3], line), to_double(items[4], line));
        }
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what(), line);
    }
    throw ConfigError("reluctivity must be '<value>', 'constant <value>' or 'curve nu_a c1 c2 c3'",
                      line);
}

struct PhaseEntry {
    std::optional<double> sigma;
    std::optional<ReluctivityLaw> nu;
    int line = 0;
};

}  // namespace

std::vector<int> RunConfig::resolved_segment_phases() const
{
    if (!segment_phases.empty()) {
        return segment_phases;
    }
    std::vector<int> p(interfaces.size() + 1);
    for (std::size_t s = 0; s < p.size(); ++s) {
        p[s] = s % 2 == 0 ? 2 : 1;
    }
    return p;
}

RunConfig parse_config(const std::string& text)
{
    RunConfig c;
    std::map<int, PhaseEntry> phases;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;

    using Handler = std::function<void(const std::string&, int)>;
    const std::map<std::string, Handler> handlers = {
        {"problem.interfaces", [&](const std::string& v, int l) { c.interfaces = to_doubles(v, l); }},
        {"problem.segment_phases",
         [&](const std::string& v, int l) {
             c.segment_phases.clear();
             for (const auto& item : split_list(v)) {
                 c.segment_phases.push_back(to_int(item, l));
             }
         }},
        {"problem.motion",
         [&](const std::string& v, int l) {
             c.motion = to_choice<MotionChoice>(v,
                                                {{"identity", MotionChoice::Identity},
                                                 {"polynomial", MotionChoice::Polynomial},
                                                 {"oscillating", MotionChoice::Oscillating}},
                                                l);
         }},
        {"problem.amplitude", [&](const std::string& v, int l) { c.motion_amplitude = to_double(v, l); }},
        {"problem.period", [&](const std::string& v, int l) { c.period = to_double(v, l); }},
        {"problem.design_phase", [&](const std::string& v, int l) { c.design_phase = to_int(v, l); }},
        {"source.f", [&](const std::string& v, int l) { c.source = to_expression(v, {"t", "x", "xi"}, l); }},
        {"discretization.n_x", [&](const std::string& v, int l) { c.n_x = to_int(v, l); }},
        {"discretization.n_t", [&](const std::string& v, int l) { c.n_t = to_int(v, l); }},
        {"discretization.quadrature",
         [&](const std::string& v, int l) { to_choice<int>(v, {{"midpoint", 0}}, l); }},
        {"discretization.periodicity",
         [&](const std::string& v, int l) {
             c.periodic_conductors_only = to_choice<bool>(v, {{"conducting", true}, {"all", false}}, l);
         }},
        {"objective.j", [&](const std::string& v, int l) { c.objective = to_expression(v, {"u"}, l); }},
        {"solver.newton_tol", [&](const std::string& v, int l) { c.newton.tol = to_double(v, l); }},
        {"solver.newton_step_tol",
         [&](const std::string& v, int l) { c.newton.step_tol = to_double(v, l); }},
        {"solver.newton_max_iter", [&](const std::string& v, int l) { c.newton.max_iter = to_int(v, l); }},
        {"descent.alpha", [&](const std::string& v, int l) { c.descent.alpha = to_double(v, l); }},
        {"descent.beta", [&](const std::string& v, int l) { c.descent.beta = to_double(v, l); }},
        {"descent.tau_init", [&](const std::string& v, int l) { c.descent.tau_init = to_double(v, l); }},
        {"descent.tau_min", [&](const std::string& v, int l) { c.descent.tau_min = to_double(v, l); }},
        {"descent.theta_tol", [&](const std::string& v, int l) { c.descent.theta_tol = to_double(v, l); }},
        {"descent.max_outer", [&](const std::string& v, int l) { c.descent.max_outer = to_int(v, l); }},
        {"descent.max_halvings",
         [&](const std::string& v, int l) { c.descent.max_halvings = to_int(v, l); }},
        {"descent.space",
         [&](const std::string& v, int l) {
             c.descent.space = to_choice<DirectionSpace>(
                 v, {{"full", DirectionSpace::FullP1}, {"segment", DirectionSpace::SegmentLinear}}, l);
         }},
        {"descent.model",
         [&](const std::string& v, int l) {
             c.derivative.model = to_choice<DeformationModel>(
                 v,
                 {{"interpolant", DeformationModel::MeshInterpolant},
                  {"pullback", DeformationModel::Pullback}},
                 l);
         }},
        {"descent.densities",
         [&](const std::string& v, int l) {
             c.derivative.quadrature = to_choice<DensityQuadrature>(
                 v,
                 {{"moments", DensityQuadrature::ElementMoments},
                  {"trapezoid", DensityQuadrature::CentroidTrapezoid}},
                 l);
         }},
        {"output.directory", [&](const std::string& v, int) { c.directory = v; }},
        {"output.vtk", [&](const std::string& v, int l) { c.vtk = to_bool(v, l); }},
        {"output.history", [&](const std::string& v, int) { c.history = v; }},
        {"gradient_check.theta",
         [&](const std::string& v, int l) { c.theta = to_expression(v, {"xi"}, l); }},
        {"gradient_check.epsilons", [&](const std::string& v, int l) { c.epsilons = to_doubles(v, l); }},
    };
    const std::set<std::string> sections = {"problem",   "materials", "source", "discretization",
                                            "objective", "solver",    "descent", "output",
                                            "gradient_check"};

    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ConfigError("unterminated section header", line);
            }
            section = trim(s.substr(1, s.size() - 2));
            if (!sections.count(section)) {
                throw ConfigError("unknown section [" + section + "]", line);
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value'", line);
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError("entry '" + key + "' outside of any section", line);
        }
        if (key.empty() || value.empty()) {
            throw ConfigError("empty key or value", line);
        }
        const std::string full = section + "." + key;
        if (seen.count(full)) {
            throw ConfigError("duplicate key '" + key + "' (first given on line " +
                                  std::to_string(seen[full]) + ")",
                              line);
        }
        seen[full] = line;

        if (section == "materials") {
            const auto d1 = key.find('.');
            const auto d2 = key.rfind('.');
            if (key.rfind("phase.", 0) != 0 || d1 == d2) {
                throw ConfigError("materials keys are phase.<id>.sigma or phase.<id>.nu", line);
            }
            const int id = to_int(key.substr(d1 + 1, d2 - d1 - 1), line);
            const std::string field = key.substr(d2 + 1);
            PhaseEntry& entry = phases[id];
            if (entry.line == 0) {
                entry.line = line;
            }
            if (field == "sigma") {
                entry.sigma = to_double(value, line);
                if (*entry.sigma < 0.0) {
                    throw ConfigError("conductivity must be non-negative", line);
                }
            } else if (field == "nu") {
                entry.nu = to_reluctivity(value, line);
            } else {
                throw ConfigError("unknown material property '" + field + "'", line);
            }
            continue;
        }
        const auto h = handlers.find(full);
        if (h == handlers.end()) {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]", line);
        }
        h->second(value, line);
    }

    auto line_of = [&](const std::string& key) {
        const auto it = seen.find(key);
        return it == seen.end() ? 0 : it->second;
    };

    for (const auto& [id, entry] : phases) {
        if (!entry.sigma || !entry.nu) {
            throw ConfigError("phase " + std::to_string(id) + " needs both sigma and nu", entry.line);
        }
        c.materials.set_phase(id, *entry.sigma, *entry.nu);
    }
    if (!seen.count("problem.interfaces")) {
        throw ConfigError("[problem] interfaces is required");
    }
    if (!seen.count("source.f")) {
        throw ConfigError("[source] f is required");
    }
    if (c.n_x < 2 || c.n_t < 2) {
        throw ConfigError("[discretization] n_x and n_t are required and must be at least 2",
                          line_of(c.n_x < 2 ? "discretization.n_x" : "discretization.n_t"));
    }
    if (!(c.period > 0.0)) {
        throw ConfigError("period must be positive", line_of("problem.period"));
    }
    if (c.motion == MotionChoice::Oscillating && !(std::abs(c.motion_amplitude) < 1.0)) {
        throw ConfigError("oscillating motion needs |amplitude| < 1", line_of("problem.amplitude"));
    }
    const std::vector<int> seg = c.resolved_segment_phases();
    if (seg.size() != c.interfaces.size() + 1) {
        throw ConfigError("segment_phases needs one entry per segment (" +
                              std::to_string(c.interfaces.size() + 1) + ")",
                          line_of("problem.segment_phases"));
    }
    for (int p : seg) {
        if (!c.materials.has_phase(p)) {
            throw ConfigError("phase " + std::to_string(p) + " is used but not defined in [materials]",
                              line_of("problem.segment_phases"));
        }
    }
    if (std::find(seg.begin(), seg.end(), c.design_phase) == seg.end()) {
        throw ConfigError("design phase " + std::to_string(c.design_phase) + " does not occur",
                          line_of("problem.design_phase"));
    }
    if (c.newton.max_iter < 1 || !(c.newton.tol > 0.0) || !(c.newton.step_tol >= 0.0)) {
        throw ConfigError("invalid Newton settings", line_of("solver.newton_tol"));
    }
    try {
        c.descent.validate(1);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[descent] ") + e.what());
    }
    if (c.epsilons.empty()) {
        throw ConfigError("epsilons must not be empty", line_of("gradient_check.epsilons"));
    }
    for (double e : c.epsilons) {
        if (!(e > 0.0)) {
            throw ConfigError("epsilons must be positive", line_of("gradient_check.epsilons"));
        }
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read configuration file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) {
        throw IoError("failed while reading " + path);
    }
    return parse_config(text.str());
}

Motion1 make_motion(const RunConfig& config)
{
    switch (config.motion) {
    case MotionChoice::Identity:
        return Motion1::identity();
    case MotionChoice::Polynomial:
        return Motion1::polynomial();
    case MotionChoice::Oscillating:
        return oscillating_motion(config.motion_amplitude, config.period);
    }
    return Motion1::identity();
}

Source make_source(const Expression& f, const Motion1& motion)
{
    const bool needs_xi = f.uses("xi");
    auto dual_at = [f, motion, needs_xi](double t, double x) {
        double xi = x;
        double dxi = 1.0;
        if (needs_xi) {
            Vec<1> y;
            y(0) = x;
            const Vec<1> r = motion.inverse(t, y);
            xi = r(0);
            dxi = 1.0 / motion.grad(t, r)(0, 0);
        }
        const Dual vars[3] = {{t, 0.0}, {x, 1.0}, {xi, dxi}};
        return f.evaluate(vars);
    };
    Source s;
    s.value = [dual_at](double t, double x, int) { return dual_at(t, x).v; };
    s.dx = [dual_at](double t, double x, int) { return dual_at(t, x).d; };
    return s;
}

Objective make_objective(const Expression& j)
{
    Objective o;
    o.j = [j](double u) {
        const Dual v[1] = {{u, 0.0}};
        return j.evaluate(v).v;
    };
    o.dj = [j](double u) {
        const Dual v[1] = {{u, 1.0}};
        return j.evaluate(v).d;
    };
    return o;
}

ShapeProblem build_problem(const RunConfig& config)
{
    const Motion1 motion = make_motion(config);
    std::optional<SpaceTimeMesh> mesh;
    try {
        mesh.emplace(generate_1d_example_mesh(config.n_x, config.n_t, config.interfaces, motion,
                                              config.period, config.resolved_segment_phases()));
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("mesh: ") + e.what());
    }
    if (config.periodic_conductors_only) {
        restrict_periodicity_to_conductors(*mesh, config.materials);
    }
    return ShapeProblem{std::move(*mesh),        config.materials, make_source(config.source, motion),
                        make_objective(config.objective), config.newton,    config.derivative};
}

Eigen::VectorXd sample_theta(const RunConfig& config, const SpatialMesh& mesh)
{
    Eigen::VectorXd theta(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        const double xi = mesh.nodes[i];
        theta(i) = mesh.design_boundary[i] ? 0.0 : config.theta.value(std::span<const double>(&xi, 1));
    }
    return theta;
}

}  // namespace stshapeopt
