/**
 * @brief Tests for the command-line layer: expression language, configuration
 * parsing, VTK export read back by an independent reader, and command exit codes.
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "stshapeopt/commands.hpp"
#include "stshapeopt/config.hpp"
#include "stshapeopt/error.hpp"
#include "stshapeopt/expression.hpp"
#include "stshapeopt/vtk.hpp"
#include "support.hpp"

using namespace stshapeopt;
namespace fs = std::filesystem;
using testing_support::v1;

namespace {

double eval(const std::string& text, std::vector<std::string> vars = {}, std::vector<double> values = {})
{
    return Expression::parse(text, std::move(vars)).value(values);
}

std::string config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "no error";
}

/** @brief Per-test scratch directory, removed afterwards. */
class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("stshapeopt_" + name))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    fs::path path_;
};

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kBase = R"(
[problem]
interfaces = 0.4, 0.6
motion = polynomial

[materials]
phase.1.sigma = 10
phase.1.nu = 1
phase.2.sigma = 0
phase.2.nu = 10

[source]
f = (xi - 0.4)(xi - 0.6) sqrt(x) (1 + t - x)

[discretization]
n_x = 20
n_t = 20
)";

/** @brief Minimal legacy VTK reader: sections by keyword, numbers read as text. */
struct VtkFile {
    std::vector<std::string> header;
    std::vector<std::array<double, 3>> points;
    std::vector<std::vector<int>> cells;
    std::vector<int> types;
    std::map<std::string, std::vector<double>> point_data;
    std::map<std::string, std::vector<double>> cell_data;
};

VtkFile read_vtk(const std::string& path)
{
    std::ifstream in(path);
    VtkFile f;
    std::string line;
    for (int i = 0; i < 4 && std::getline(in, line); ++i) {
        f.header.push_back(line);
    }
    std::string word;
    std::map<std::string, std::vector<double>>* data = nullptr;
    int data_count = 0;
    while (in >> word) {
        if (word == "POINTS") {
            int n;
            std::string type;
            in >> n >> type;
            f.points.resize(n);
            for (auto& p : f.points) {
                in >> p[0] >> p[1] >> p[2];
            }
        } else if (word == "CELLS") {
            int n, size;
            in >> n >> size;
            for (int c = 0; c < n; ++c) {
                int k;
                in >> k;
                std::vector<int> ids(k);
                for (int& id : ids) {
                    in >> id;
                }
                f.cells.push_back(ids);
            }
        } else if (word == "CELL_TYPES") {
            int n;
            in >> n;
            f.types.resize(n);
            for (int& t : f.types) {
                in >> t;
            }
        } else if (word == "POINT_DATA" || word == "CELL_DATA") {
            in >> data_count;
            data = word == "POINT_DATA" ? &f.point_data : &f.cell_data;
        } else if (word == "SCALARS") {
            std::string name, type, lookup, table;
            int ncomp;
            in >> name >> type >> ncomp >> lookup >> table;
            std::vector<double>& values = (*data)[name];
            values.resize(data_count);
            for (double& v : values) {
                in >> v;
            }
        } else {
            ADD_FAILURE() << "unexpected token " << word;
            break;
        }
    }
    return f;
}

}  // namespace

TEST(Expression, Arithmetic)
{
    EXPECT_DOUBLE_EQ(eval("1 + 2*3"), 7.0);
    EXPECT_DOUBLE_EQ(eval("(1 + 2) (3 + 4)"), 21.0);
    EXPECT_DOUBLE_EQ(eval("2^3^2"), 512.0);
    EXPECT_DOUBLE_EQ(eval("-2^2"), -4.0);
    EXPECT_DOUBLE_EQ(eval("2^-1"), 0.5);
    EXPECT_DOUBLE_EQ(eval("8 / 4 / 2"), 1.0);
    EXPECT_DOUBLE_EQ(eval("1 - 2 - 3"), -4.0);
    EXPECT_DOUBLE_EQ(eval("2 pi"), 2.0 * M_PI);
    EXPECT_DOUBLE_EQ(eval("1.5e-3 * 2E2"), 0.3);
    EXPECT_DOUBLE_EQ(eval("sqrt(4) + abs(-3) + exp(0) + log(1) + sin(0) + cos(0)"), 7.0);
    EXPECT_DOUBLE_EQ(eval("x y + 2 x", {"x", "y"}, {3.0, 5.0}), 21.0);
    EXPECT_DOUBLE_EQ(Expression::constant(2.5).value({}), 2.5);
}

TEST(Expression, ForwardDerivative)
{
    const Expression e = Expression::parse("x^3 sin(x) + exp(2 x) / (1 + x^2) - sqrt(x) log(x) + abs(x - 2)", {"x"});
    auto f = [](double x) {
        return x * x * x * std::sin(x) + std::exp(2 * x) / (1 + x * x) - std::sqrt(x) * std::log(x) +
               std::abs(x - 2);
    };
    for (double x : {0.3, 1.1, 2.7}) {
        const std::array<Dual, 1> in{{{x, 1.0}}};
        const Dual r = e.evaluate(in);
        EXPECT_NEAR(r.v, f(x), 1e-13 * std::abs(f(x)));
        const double h = 1e-5;
        const double fd = (f(x + h) - f(x - h)) / (2 * h);
        EXPECT_NEAR(r.d, fd, 1e-7 * (1 + std::abs(fd)));
    }
    // A zero seed contributes nothing even where the local derivative is infinite.
    const Expression s = Expression::parse("sqrt(x) + y", {"x", "y"});
    const std::array<Dual, 2> in{{{0.0, 0.0}, {1.0, 1.0}}};
    EXPECT_EQ(s.evaluate(in).d, 1.0);
}

TEST(Expression, VariablesAndErrors)
{
    const Expression e = Expression::parse("t + x", {"t", "x", "xi"});
    EXPECT_TRUE(e.uses("t"));
    EXPECT_FALSE(e.uses("xi"));
    EXPECT_EQ(e.text(), "t + x");
    for (const char* bad : {"", "1 +", "(1", "1)", "foo(2)", "z", "1 ^", "2 * * 3", "sin 2"}) {
        EXPECT_THROW(Expression::parse(bad, {"x"}), ConfigError) << bad;
    }
    try {
        Expression::parse("(x - 0.4 * sqrt(x)", {"x"});
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_NE(std::string(err.what()).find("column"), std::string::npos) << err.what();
    }
}

TEST(Config, ParsesEveryKey)
{
    const RunConfig c = parse_config(R"(
# comment line
[problem]
interfaces = 0.25 0.75
segment_phases = 2, 1, 2
motion = oscillating     # trailing comment
amplitude = 0.3
period = 2
design_phase = 1
[materials]
phase.1.sigma = 10
phase.1.nu = curve 10 1 10000 2
phase.2.sigma = 0
phase.2.nu = constant 10
[source]
f = t x
[discretization]
n_x = 24
n_t = 12
quadrature = midpoint
periodicity = all
[objective]
j = u^2
[solver]
newton_tol = 1e-9
newton_step_tol = 1e-13
newton_max_iter = 7
[descent]
alpha = 0.7
beta = 0.1
tau_init = 5
tau_min = 1e-8
theta_tol = 1e-7
max_outer = 3
max_halvings = 9
space = full
model = pullback
densities = trapezoid
[output]
directory = somewhere
vtk = true
history = h.csv
[gradient_check]
theta = xi (1 - xi)
epsilons = 1e-1 1e-2
)");
    EXPECT_EQ(c.interfaces, (std::vector<double>{0.25, 0.75}));
    EXPECT_EQ(c.segment_phases, (std::vector<int>{2, 1, 2}));
    EXPECT_EQ(c.motion, MotionChoice::Oscillating);
    EXPECT_EQ(c.motion_amplitude, 0.3);
    EXPECT_EQ(c.period, 2.0);
    EXPECT_EQ(c.materials.phase(1).sigma, 10.0);
    EXPECT_FALSE(c.materials.phase(1).nu.is_constant());
    EXPECT_EQ(c.materials.phase(1).nu.c2(), 1e4);
    EXPECT_EQ(c.materials.phase(2).nu.value(), 10.0);
    EXPECT_EQ(c.source.text(), "t x");
    EXPECT_EQ(c.n_x, 24);
    EXPECT_EQ(c.n_t, 12);
    EXPECT_FALSE(c.periodic_conductors_only);
    EXPECT_EQ(c.objective.text(), "u^2");
    EXPECT_EQ(c.newton.tol, 1e-9);
    EXPECT_EQ(c.newton.step_tol, 1e-13);
    EXPECT_EQ(c.newton.max_iter, 7);
    EXPECT_EQ(c.descent.alpha, 0.7);
    EXPECT_EQ(c.descent.beta, 0.1);
    EXPECT_EQ(c.descent.tau_init, 5.0);
    EXPECT_EQ(c.descent.tau_min, 1e-8);
    EXPECT_EQ(c.descent.theta_tol, 1e-7);
    EXPECT_EQ(c.descent.max_outer, 3);
    EXPECT_EQ(c.descent.max_halvings, 9);
    EXPECT_EQ(c.descent.space, DirectionSpace::FullP1);
    EXPECT_EQ(c.derivative.model, DeformationModel::Pullback);
    EXPECT_EQ(c.derivative.quadrature, DensityQuadrature::CentroidTrapezoid);
    EXPECT_EQ(c.directory, "somewhere");
    EXPECT_TRUE(c.vtk);
    EXPECT_EQ(c.history, "h.csv");
    EXPECT_EQ(c.theta.text(), "xi (1 - xi)");
    EXPECT_EQ(c.epsilons, (std::vector<double>{1e-1, 1e-2}));
}

TEST(Config, DefaultsAndAlternatingPhases)
{
    const RunConfig c = parse_config(kBase);
    EXPECT_EQ(c.resolved_segment_phases(), (std::vector<int>{2, 1, 2}));
    EXPECT_EQ(c.motion, MotionChoice::Polynomial);
    EXPECT_TRUE(c.periodic_conductors_only);
    EXPECT_EQ(c.directory, "out");
    EXPECT_FALSE(c.vtk);
    EXPECT_EQ(c.descent.alpha, 0.5);
    EXPECT_EQ(c.derivative.model, DeformationModel::MeshInterpolant);
}

TEST(Config, ErrorsCarryLineNumbers)
{
    const std::string base(kBase);
    struct Case {
        std::string text;
        std::string needle;
    };
    const std::vector<Case> cases{
        {base + "[nowhere]\n", "line 18"},
        {base + "bogus = 1\n", "line 18"},
        {base + "n_x = 30\n", "line 18"},
        {base + "n_t = abc\n", "line 18"},
        {base + "[source]\nf = (xi\n", "line 19"},
        {base + "[materials]\nphase.3.nu = curve 1 2\n", "line 19"},
        {base + "[descent]\nspace = diagonal\n", "line 19"},
        {base + "just some words\n", "line 18"},
    };
    for (const Case& c : cases) {
        const std::string msg = config_error(c.text);
        EXPECT_NE(msg.find(c.needle), std::string::npos) << msg;
    }
    EXPECT_NE(config_error("[problem]\nmotion = identity\n").find("interfaces"), std::string::npos);
    EXPECT_NE(config_error("[problem]\ninterfaces = 0.4 0.6\n[source]\nf = 1\n[discretization]\nn_x = 1\nn_t = 4\n"),
              "no error");
}

TEST(Config, LoadErrors)
{
    EXPECT_THROW(load_config("/nonexistent/stshapeopt.cfg"), IoError);
    TempDir dir("config_load");
    write_text(dir.file("run.cfg"), kBase);
    EXPECT_EQ(load_config(dir.file("run.cfg")).n_x, 20);
}

TEST(Config, SourceExpressionMatchesHandWrittenSource)
{
    const RunConfig c = parse_config(kBase);
    const Motion1 motion = make_motion(c);
    const Source parsed = make_source(c.source, motion);
    const Source hand = testing_support::example_source(motion);
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double t = ut(gen);
        const double x = motion.forward(t, v1(0.01 + 0.98 * ut(gen)))(0);
        EXPECT_NEAR(parsed.value(t, x, 1), hand.value(t, x, 1), 1e-14);
        EXPECT_NEAR(parsed.dx(t, x, 2), hand.dx(t, x, 2), 1e-12);
    }
    const Objective j = make_objective(Expression::parse("u^2 + 3 u", {"u"}));
    EXPECT_DOUBLE_EQ(j.j(2.0), 10.0);
    EXPECT_DOUBLE_EQ(j.dj(2.0), 7.0);
}

TEST(Config, BuiltProblemMatchesHandWrittenProblem)
{
    const ShapeProblem built = build_problem(parse_config(kBase));
    const ShapeProblem hand = testing_support::example_problem(20, Motion1::polynomial(),
                                                                testing_support::example_materials());
    const double a = evaluate_design(built, built.mesh).J;
    const double b = evaluate_design(hand, hand.mesh).J;
    EXPECT_NEAR(a, b, 1e-13 * std::abs(b));
    for (int i = 0; i <= 20; ++i) {
        EXPECT_EQ(built.mesh.periodic_line(i), hand.mesh.periodic_line(i));
    }
    RunConfig small = parse_config(kBase);
    small.n_x = 3;
    EXPECT_THROW(build_problem(small), ConfigError);
}

TEST(Config, SampledThetaVanishesOnTheDesignBoundary)
{
    RunConfig c = parse_config(kBase);
    c.theta = Expression::parse("1 + xi", {"xi"});
    const SpatialMesh mesh = build_problem(c).mesh.spatial_mesh();
    const Eigen::VectorXd theta = sample_theta(c, mesh);
    EXPECT_EQ(theta(0), 0.0);
    EXPECT_EQ(theta(mesh.num_nodes() - 1), 0.0);
    for (int i = 1; i + 1 < mesh.num_nodes(); ++i) {
        EXPECT_DOUBLE_EQ(theta(i), 1.0 + mesh.nodes[i]);
    }
}

TEST(Vtk, SpaceTimeRoundTrip)
{
    TempDir dir("vtk_spacetime");
    const ShapeProblem p = testing_support::example_problem(6, Motion1::polynomial(),
                                                            testing_support::example_materials());
    const Evaluation e = evaluate_design(p, p.mesh);
    const Eigen::VectorXd u = e.u.nodal();
    Eigen::VectorXd area(p.mesh.num_elements());
    for (int k = 0; k < area.size(); ++k) {
        area(k) = p.mesh.signed_area(k);
    }
    write_spacetime_vtk(dir.file("st.vtk"), p.mesh, {{"u", u}}, {{"area", area}});
    const VtkFile f = read_vtk(dir.file("st.vtk"));
    ASSERT_EQ(f.header.size(), 4u);
    EXPECT_EQ(f.header[0], "# vtk DataFile Version 3.0");
    EXPECT_EQ(f.header[2], "ASCII");
    EXPECT_EQ(f.header[3], "DATASET UNSTRUCTURED_GRID");
    ASSERT_EQ(static_cast<int>(f.points.size()), p.mesh.num_vertices());
    for (int v = 0; v < p.mesh.num_vertices(); ++v) {
        EXPECT_EQ(f.points[v][0], p.mesh.vertex(v)(1));
        EXPECT_EQ(f.points[v][1], p.mesh.vertex(v)(0));
        EXPECT_EQ(f.points[v][2], 0.0);
        EXPECT_EQ(f.point_data.at("u")[v], u(v));
    }
    ASSERT_EQ(static_cast<int>(f.cells.size()), p.mesh.num_elements());
    for (int c = 0; c < p.mesh.num_elements(); ++c) {
        const auto& tri = p.mesh.element(c).v;
        EXPECT_EQ(f.cells[c], (std::vector<int>{tri[0], tri[1], tri[2]}));
        EXPECT_EQ(f.types[c], 5);
        EXPECT_EQ(f.cell_data.at("phase")[c], p.mesh.element(c).phase);
        EXPECT_EQ(f.cell_data.at("area")[c], area(c));
    }
}

TEST(Vtk, SpatialMeshAndErrors)
{
    TempDir dir("vtk_spatial");
    const SpaceTimeMesh mesh = generate_1d_example_mesh(8, 4, {0.25, 0.75}, Motion1::identity());
    const SpatialMesh s = mesh.spatial_mesh();
    const Eigen::VectorXd g0 = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
    write_spatial_vtk(dir.file("s.vtk"), s, {}, {{"g0", g0}});
    const VtkFile f = read_vtk(dir.file("s.vtk"));
    ASSERT_EQ(f.points.size(), 9u);
    ASSERT_EQ(f.cells.size(), 8u);
    for (int e = 0; e < 8; ++e) {
        EXPECT_EQ(f.cells[e], (std::vector<int>{e, e + 1}));
        EXPECT_EQ(f.types[e], 3);
        EXPECT_EQ(f.cell_data.at("g0")[e], g0(e));
        EXPECT_EQ(f.cell_data.at("phase")[e], s.phase[e]);
    }
    EXPECT_EQ(f.points[8][0], 1.0);

    EXPECT_THROW(write_spatial_vtk(dir.file("bad.vtk"), s, {}, {{"g0", Eigen::VectorXd::Zero(3)}}), ArgumentError);
    EXPECT_THROW(write_spatial_vtk(dir.file("bad.vtk"), s, {}, {{"has blank", g0}}), ArgumentError);
    EXPECT_THROW(write_spatial_vtk("/nonexistent/dir/s.vtk", s), IoError);
}

TEST(Commands, ExitCodeMapping)
{
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(IoError("x")), kExitIo);
    EXPECT_EQ(exit_code_for(NonconvergenceError("x", 1.0)), kExitSolver);
    EXPECT_EQ(exit_code_for(SolverError("x")), kExitSolver);
    EXPECT_EQ(exit_code_for(GeometryError("x")), kExitSolver);
}

TEST(Commands, SolveWritesSummaryAndVtk)
{
    TempDir dir("cmd_solve");
    write_text(dir.file("run.cfg"), kBase);
    std::ostringstream out, err;
    const int code = run_command(Command::Solve, {dir.file("run.cfg"), dir.file("out"), true}, out, err);
    EXPECT_EQ(code, kExitOk) << err.str();
    EXPECT_NE(out.str().find("J = "), std::string::npos);
    EXPECT_NE(read_text(dir.file("out/solve.txt")).find("newton_iterations = 1"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir.file("out/state.vtk")));
}

TEST(Commands, ConfigIoAndSolverFailures)
{
    TempDir dir("cmd_fail");
    std::ostringstream out, err;

    write_text(dir.file("bad.cfg"), std::string(kBase) + "[output]\ncolor = red\n");
    EXPECT_EQ(run_command(Command::Solve, {dir.file("bad.cfg"), {}, false}, out, err), kExitConfig);
    EXPECT_NE(err.str().find("config error"), std::string::npos);

    EXPECT_EQ(run_command(Command::Solve, {dir.file("missing.cfg"), {}, false}, out, err), kExitIo);

    write_text(dir.file("run.cfg"), kBase);
    EXPECT_EQ(run_command(Command::Solve, {dir.file("run.cfg"), std::string("/proc/stshapeopt_nope"), false}, out, err),
              kExitIo);

    write_text(dir.file("stiff.cfg"), std::string(kBase) +
                                          "[solver]\nnewton_max_iter = 1\n"
                                          "[output]\ndirectory = " + dir.file("o") + "\n");
    std::string stiff = read_text(dir.file("stiff.cfg"));
    stiff.replace(stiff.find("phase.1.nu = 1"), 14, "phase.1.nu = curve 10 1 10000 2");
    write_text(dir.file("stiff.cfg"), stiff);
    EXPECT_EQ(run_command(Command::Solve, {dir.file("stiff.cfg"), {}, false}, out, err), kExitSolver);
    EXPECT_EQ(run_command(Command::Optimize, {dir.file("stiff.cfg"), {}, false}, out, err), kExitSolver);
    EXPECT_NE(err.str().find("solver failure"), std::string::npos);
}

TEST(Commands, CheckGradient)
{
    TempDir dir("cmd_check");
    write_text(dir.file("run.cfg"), std::string(kBase) + "[gradient_check]\ntheta = sin(pi xi) (1 + xi)\n");
    std::ostringstream out, err;
    EXPECT_EQ(run_command(Command::CheckGradient, {dir.file("run.cfg"), {}, false}, out, err), kExitOk) << out.str();
    EXPECT_NE(out.str().find("epsilon,finite_difference,adjoint,rel_error\n"), std::string::npos);
    EXPECT_NE(out.str().find("PASS"), std::string::npos);

    write_text(dir.file("zero.cfg"), std::string(kBase) + "[gradient_check]\ntheta = 0\n");
    std::ostringstream out0;
    EXPECT_EQ(run_command(Command::CheckGradient, {dir.file("zero.cfg"), {}, false}, out0, err), kExitOk);
    EXPECT_NE(out0.str().find("observed order = n/a"), std::string::npos);
}

TEST(Commands, OptimizeWritesHistoryAndFinalDesign)
{
    TempDir dir("cmd_opt");
    write_text(dir.file("run.cfg"), std::string(kBase) + "[descent]\nmax_outer = 2\nspace = segment\ntau_init = 1000\n");
    std::ostringstream out, err;
    EXPECT_EQ(run_command(Command::Optimize, {dir.file("run.cfg"), dir.str(), false}, out, err), kExitOk)
        << err.str();
    const std::string hist = read_text(dir.file("history.csv"));
    EXPECT_EQ(hist.rfind("iter,J,theta_norm,tau,newton_iters\n", 0), 0u);
    EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 4);
    EXPECT_TRUE(fs::exists(dir.file("final_state.vtk")));
    const VtkFile design = read_vtk(dir.file("final_design.vtk"));
    EXPECT_EQ(design.cell_data.count("g0"), 1u);
    EXPECT_EQ(design.cell_data.count("g1"), 1u);
    EXPECT_NE(out.str().find("stop reason = max_outer"), std::string::npos);
}
