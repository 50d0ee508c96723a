#include "stshapeopt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "stshapeopt/error.hpp"
#include "stshapeopt/vtk.hpp"

namespace stshapeopt {

namespace {

namespace fs = std::filesystem;

std::string sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_state_vtk(const std::string& path, const Evaluation& design)
{
    write_spacetime_vtk(path, design.mesh, {{"u", design.u.nodal()}});
}

void write_design_vtk(const std::string& path, const Evaluation& design,
                      const std::optional<DerivativeDensities>& densities)
{
    const SpatialMesh smesh = design.mesh.spatial_mesh();
    std::vector<VtkField> cells;
    if (densities) {
        const int n = smesh.num_elements();
        cells.push_back({"g0", Eigen::Map<const Eigen::VectorXd>(densities->g0.data(), n)});
        cells.push_back({"g1", Eigen::Map<const Eigen::VectorXd>(densities->g1.data(), n)});
    }
    write_spatial_vtk(path, smesh, {}, cells);
}

std::string interface_list(const SpaceTimeMesh& mesh)
{
    std::string s;
    for (int node : mesh.interface_nodes()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%.6f", s.empty() ? "" : " ", mesh.xi()[node]);
        s += buf;
    }
    return s;
}

RunConfig load_with_overrides(const CommandOptions& options)
{
    RunConfig config = load_config(options.config_path);
    if (options.out_dir) {
        config.directory = *options.out_dir;
    }
    if (options.vtk) {
        config.vtk = true;
    }
    return config;
}

int cmd_solve(const RunConfig& config, std::ostream& out)
{
    const ShapeProblem problem = build_problem(config);
    ensure_output_directory(config.directory);
    const Evaluation design = evaluate_design(problem, problem.mesh);
    out << "J = " << sci(design.J) << "\n";
    out << "newton_iterations = " << design.newton_iterations << "\n";

    const std::string summary = join(config.directory, "solve.txt");
    std::ofstream f(summary);
    f << "J = " << sci(design.J) << "\nnewton_iterations = " << design.newton_iterations << "\n";
    f.flush();
    if (!f) {
        throw IoError("failed while writing " + summary);
    }
    if (config.vtk) {
        write_state_vtk(join(config.directory, "state.vtk"), design);
        out << "wrote " << join(config.directory, "state.vtk") << "\n";
    }
    return kExitOk;
}

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    const ShapeProblem problem = build_problem(config);
    ensure_output_directory(config.directory);
    const OptimizationReport report =
        optimize(problem, config.descent, [&](const IterationRecord& r, const Evaluation& e) {
            out << "iter " << r.iteration << "  J " << sci(r.J) << "  theta_norm " << sci(r.theta_norm)
                << "  tau " << sci(r.tau) << "  newton " << r.newton_iterations << "\n";
            if (config.vtk) {
                char name[32];
                std::snprintf(name, sizeof name, "iter_%04d.vtk", r.iteration);
                write_state_vtk(join(config.directory, name), e);
            }
        });
    write_history_csv(join(config.directory, config.history), report.history);
    if (report.final_design) {
        const Evaluation& final_design = *report.final_design;
        write_state_vtk(join(config.directory, "final_state.vtk"), final_design);
        std::optional<DerivativeDensities> dens;
        if (report.reason != StopReason::SolverFailure) {
            dens = design_derivative(problem, final_design);
        }
        write_design_vtk(join(config.directory, "final_design.vtk"), final_design, dens);
        out << "final J = " << sci(final_design.J) << "\n";
        out << "final interfaces = " << interface_list(final_design.mesh) << "\n";
    }
    out << "stop reason = " << to_string(report.reason) << "\n";
    if (report.reason == StopReason::SolverFailure) {
        err << "error: " << report.message << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_check_gradient(const RunConfig& config, std::ostream& out)
{
    const ShapeProblem problem = build_problem(config);
    const Eigen::VectorXd theta = sample_theta(config, problem.mesh.spatial_mesh());
    const GradientCheckResult r = check_gradient(problem, theta, config.epsilons);
    out << "epsilon,finite_difference,adjoint,rel_error\n";
    for (const auto& row : r.rows) {
        out << sci(row.epsilon) << "," << sci(row.finite_difference) << "," << sci(row.adjoint) << ","
            << sci(row.rel_error) << "\n";
    }
    if (std::isnan(r.observed_order)) {
        out << "observed order = n/a\n";
    } else {
        out << "observed order = " << r.observed_order << " (fitted over " << r.fitted_rows
            << " rows)\n";
    }
    out << (r.passed ? "PASS" : "FAIL") << "\n";
    return r.passed ? kExitOk : kExitCheckFailed;
}

}  // namespace

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) {
        return kExitConfig;
    }
    if (dynamic_cast<const IoError*>(&e)) {
        return kExitIo;
    }
    return kExitSolver;
}

int run_command(Command command, const CommandOptions& options, std::ostream& out, std::ostream& err)
{
    try {
        const RunConfig config = load_with_overrides(options);
        switch (command) {
        case Command::Solve:
            return cmd_solve(config, out);
        case Command::Optimize:
            return cmd_optimize(config, out, err);
        case Command::CheckGradient:
            return cmd_check_gradient(config, out);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        const char* kind = code == kExitConfig ? "config error"
                           : code == kExitIo   ? "io error"
                                               : "solver failure";
        err << options.config_path << ": " << kind << ": " << e.what() << "\n";
        return code;
    }
}

GradientCheckResult check_gradient(const ShapeProblem& problem, const Eigen::VectorXd& theta,
                                   std::vector<double> epsilons)
{
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    GradientCheckResult result;
    const Evaluation base = evaluate_design(problem, problem.mesh);
    const SpatialMesh smesh = base.mesh.spatial_mesh();
    result.adjoint = design_derivative(problem, base).pair(smesh, theta);
    bool all_zero = result.adjoint == 0.0;
    for (double eps : epsilons) {
        const Evaluation trial = evaluate_design(problem, deform_mesh(base.mesh, theta, eps), base.u);
        GradientCheckRow row;
        row.epsilon = eps;
        row.finite_difference = (trial.J - base.J) / eps;
        row.adjoint = result.adjoint;
        const double diff = std::abs(row.finite_difference - result.adjoint);
        row.rel_error = result.adjoint == 0.0 ? diff : diff / std::abs(result.adjoint);
        all_zero = all_zero && row.finite_difference == 0.0;
        result.rows.push_back(row);
    }

    int fitted = 0;
    while (fitted < static_cast<int>(result.rows.size()) && result.rows[fitted].rel_error > 0.0 &&
           (fitted == 0 || result.rows[fitted].rel_error < result.rows[fitted - 1].rel_error)) {
        ++fitted;
    }
    result.fitted_rows = fitted;
    result.observed_order = std::numeric_limits<double>::quiet_NaN();
    if (fitted >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int i = 0; i < fitted; ++i) {
            const double x = std::log(result.rows[i].epsilon);
            const double y = std::log(result.rows[i].rel_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        result.observed_order = (fitted * sxy - sx * sy) / (fitted * sxx - sx * sx);
    }
    result.passed = all_zero || (!std::isnan(result.observed_order) &&
                                 result.observed_order >= kMinObservedOrder);
    return result;
}

void ensure_output_directory(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir +
                      (ec ? ": " + ec.message() : std::string()));
    }
    const std::string probe = join(dir, ".write_probe");
    {
        std::ofstream f(probe);
        if (!f) {
            throw IoError("output directory " + dir + " is not writable");
        }
    }
    fs::remove(probe, ec);
}

}  // namespace stshapeopt
