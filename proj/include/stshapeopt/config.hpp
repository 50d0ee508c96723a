/**
 * @brief Run configuration: a sectioned key/value text format and the problem it describes.
 *
 * Format, one entry per line:
 *   line    := blank | comment | section | entry
 *   comment := '#' anything            (also allowed after a value)
 *   section := '[' name ']'
 *   entry   := key '=' value
 * Keys are unique within a section. Lists are separated by commas or blanks.
 * The recognised sections and keys are listed in README.md.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stshapeopt/expression.hpp"
#include "stshapeopt/optimizer.hpp"

namespace stshapeopt {

enum class MotionChoice { Identity, Polynomial, Oscillating };

struct RunConfig {
    // [problem]
    std::vector<double> interfaces;
    std::vector<int> segment_phases;  ///< empty: alternate 2, 1, 2, ...
    MotionChoice motion = MotionChoice::Polynomial;
    double motion_amplitude = 0.2;  ///< oscillating motion only
    double period = 1.0;
    int design_phase = 1;

    // [materials]
    MaterialLaw materials;

    // [source], variables t, x, xi (xi = reference coordinate of x at time t)
    Expression source = Expression::constant(0.0);

    // [discretization]
    int n_x = 0;
    int n_t = 0;
    bool periodic_conductors_only = true;

    // [objective], variable u
    Expression objective = Expression::parse("u", {"u"});

    // [solver]
    NewtonOptions newton;

    // [descent]
    DescentConfig descent;
    DerivativeOptions derivative;

    // [output]
    std::string directory = "out";
    bool vtk = false;
    std::string history = "history.csv";

    // [gradient_check], theta in the variable xi
    Expression theta = Expression::parse("sin(pi xi)", {"xi"});
    std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5};

    /** @brief Segment phases after applying the alternating default. */
    std::vector<int> resolved_segment_phases() const;
};

/** @brief Parses configuration text. Throws ConfigError carrying the line number. */
RunConfig parse_config(const std::string& text);

/** @brief Reads and parses a file. Throws IoError if it cannot be read. */
RunConfig load_config(const std::string& path);

/** @brief Motion selected by the configuration. */
Motion1 make_motion(const RunConfig& config);

/** @brief Source with value and x-derivative from the source expression. */
Source make_source(const Expression& f, const Motion1& motion);

/** @brief Objective j(u) with its derivative from the objective expression. */
Objective make_objective(const Expression& j);

/**
 * @brief Mesh, materials, source and objective of the configured problem.
 * Throws ConfigError when the geometry is rejected by the mesh generator.
 */
ShapeProblem build_problem(const RunConfig& config);

/** @brief Nodal values of the configured gradient-check deformation on a spatial mesh. */
Eigen::VectorXd sample_theta(const RunConfig& config, const SpatialMesh& mesh);

}  // namespace stshapeopt
