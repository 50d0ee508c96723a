/**
 * @brief The solve, optimize and check-gradient commands behind the command-line driver.
 */
#pragma once

#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stshapeopt/config.hpp"

namespace stshapeopt {

enum class Command { Solve, Optimize, CheckGradient };

struct CommandOptions {
    std::string config_path;
    std::optional<std::string> out_dir;  ///< overrides [output] directory
    bool vtk = false;                    ///< forces VTK output on
};

/** @brief Exit codes of the driver. */
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitSolver = 4,
};

/** @brief ConfigError -> 2, IoError -> 3, any other failure -> 4. */
int exit_code_for(const std::exception& e);

/** @brief Loads the configuration, runs the command and maps failures to exit codes. */
int run_command(Command command, const CommandOptions& options, std::ostream& out, std::ostream& err);

struct GradientCheckRow {
    double epsilon = 0.0;
    double finite_difference = 0.0;
    double adjoint = 0.0;
    double rel_error = 0.0;  ///< relative to |adjoint|, absolute when the adjoint value is 0
};

struct GradientCheckResult {
    std::vector<GradientCheckRow> rows;
    double adjoint = 0.0;
    /** @brief Least-squares slope of log error against log epsilon; NaN if undefined. */
    double observed_order = 0.0;
    /** @brief Number of leading rows (largest epsilons first) used in the fit. */
    int fitted_rows = 0;
    bool passed = false;
};

/** @brief Smallest fitted slope accepted as first-order convergence. */
inline constexpr double kMinObservedOrder = 0.95;

/**
 * @brief One-sided difference quotients (J(Omega_eps theta) - J(Omega)) / eps
 * against the adjoint-based derivative. The slope is fitted over the leading
 * run of strictly decreasing errors; later rows are treated as rounding noise.
 * Passes when the slope is at least kMinObservedOrder, or when theta gives a
 * zero derivative and zero differences.
 */
GradientCheckResult check_gradient(const ShapeProblem& problem, const Eigen::VectorXd& theta,
                                   std::vector<double> epsilons);

/** @brief Creates the directory if needed and checks that files can be written into it. */
void ensure_output_directory(const std::string& dir);

}  // namespace stshapeopt
