/**
 * @brief Shape gradient loop: Hilbertian descent direction, step halving line
 * search, mesh update and iteration history.
 */
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stshapeopt/fem.hpp"
#include "stshapeopt/shape_derivative.hpp"

namespace stshapeopt {

/**
 * @brief Space in which the Hilbertian problem is solved.
 *  - FullP1: every P1 field on the spatial mesh vanishing on the design boundary.
 *  - SegmentLinear: fields that are linear on each phase segment, i.e. spanned by
 *    one hat per interface node over the interface and design-boundary nodes. The
 *    continuous derivative only sees interface displacements, and its Riesz
 *    representative for the gradient inner product lies in this space.
 */
enum class DirectionSpace { FullP1, SegmentLinear };

struct DescentConfig {
    double alpha = 0.5;        ///< gradient weight of the inner product
    double beta = 0.0;         ///< mass weight of the inner product
    bool include_cauchy_riemann = false;  ///< two space dimensions only
    double tau_init = 1.0;
    double tau_min = 1e-10;
    double theta_tol = 1e-9;
    int max_outer = 200;
    int max_halvings = 60;
    DirectionSpace space = DirectionSpace::FullP1;

    /** @brief Throws ConfigError unless alpha > 0, beta >= 0, 0 < tau_min < tau_init, limits positive. */
    void validate(int space_dim = 1) const;
};

/**
 * @brief Solves b(theta, eta) = J'(eta) for all eta of the configured space
 * (vanishing on the design boundary), with b = int 2 alpha theta' eta' + beta
 * theta eta, and returns the descent direction -theta as nodal values.
 */
Eigen::VectorXd hilbertian_direction(const SpatialMesh& mesh, const DerivativeDensities& densities,
                                     const DescentConfig& config);

/** @brief sqrt(b(theta, theta)). */
double hilbertian_norm(const SpatialMesh& mesh, const Eigen::VectorXd& theta,
                       const DescentConfig& config);

/** @brief Everything needed to evaluate J on a design mesh. */
struct ShapeProblem {
    SpaceTimeMesh mesh;  ///< initial design
    MaterialLaw materials;
    Source source;
    Objective objective;
    NewtonOptions newton;
    DerivativeOptions derivative;
};

/** @brief State of one design: mesh, layout, state and objective value. */
struct Evaluation {
    SpaceTimeMesh mesh;
    PhaseLayout layout;
    Field u;
    double J = 0.0;
    int newton_iterations = 0;
};

/** @brief Solves the state on mesh (optionally warm started) and evaluates J. */
Evaluation evaluate_design(const ShapeProblem& problem, const SpaceTimeMesh& mesh,
                           const std::optional<Field>& warm_start = std::nullopt);

/** @brief J'(Omega) densities at an evaluated design (adjoint solve included). */
DerivativeDensities design_derivative(const ShapeProblem& problem, const Evaluation& design);

struct LineSearchResult {
    bool accepted = false;
    double tau = 0.0;
    int halvings = 0;
    int inverted_trials = 0;  ///< trials rejected by the geometric guard, no solve attempted
    std::optional<Evaluation> design;
};

/**
 * @brief First tau in tau0, tau0/2, ... (tau >= tau_min, at most max_halvings
 * halvings) for which the deformed mesh is valid and J strictly decreases.
 * Trial meshes with inverted elements and trial solves that fail to converge
 * are rejected and the step is halved.
 */
LineSearchResult line_search(const ShapeProblem& problem, const Evaluation& current,
                             const Eigen::VectorXd& direction, double tau0,
                             const DescentConfig& config);

struct IterationRecord {
    int iteration = 0;
    double J = 0.0;
    double theta_norm = 0.0;
    double tau = 0.0;  ///< accepted step from this design, 0 if none
    int newton_iterations = 0;
};

enum class StopReason { ThetaTolerance, LineSearchFailure, MaxIterations, SolverFailure };

std::string to_string(StopReason reason);

struct OptimizationReport {
    std::vector<IterationRecord> history;
    StopReason reason = StopReason::MaxIterations;
    std::string message;  ///< error text when reason is SolverFailure
    std::optional<Evaluation> final_design;  ///< last accepted design
};

/** @brief Called after every recorded iteration with the design it describes. */
using IterationCallback = std::function<void(const IterationRecord&, const Evaluation&)>;

/**
 * @brief Runs the shape gradient loop. Solver and geometry errors stop the
 * loop with reason SolverFailure; the report keeps the last good design.
 */
OptimizationReport optimize(const ShapeProblem& problem, const DescentConfig& config,
                            const IterationCallback& on_iteration = {});

/** @brief Writes the iter,J,theta_norm,tau,newton_iters table. Throws IoError. */
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

}  // namespace stshapeopt
