#include "stshapeopt/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SparseCholesky>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

namespace {

/** @brief Matrix of b over all nodes of the spatial mesh. */
Eigen::SparseMatrix<double> inner_product_matrix(const SpatialMesh& mesh, const DescentConfig& c)
{
    const int n = mesh.num_elements();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * n);
    for (int e = 0; e < n; ++e) {
        const double h = mesh.length(e);
        const double k = 2.0 * c.alpha / h;
        const double m = c.beta * h / 6.0;
        trip.emplace_back(e, e, k + 2.0 * m);
        trip.emplace_back(e, e + 1, -k + m);
        trip.emplace_back(e + 1, e, -k + m);
        trip.emplace_back(e + 1, e + 1, k + 2.0 * m);
    }
    Eigen::SparseMatrix<double> B(n + 1, n + 1);
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

/** @brief Columns are the nodal values of a basis of the direction space. */
Eigen::SparseMatrix<double> direction_basis(const SpatialMesh& mesh, DirectionSpace space)
{
    const int nn = mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    int cols = 0;
    if (space == DirectionSpace::FullP1) {
        for (int i = 0; i < nn; ++i) {
            if (!mesh.design_boundary[i]) {
                trip.emplace_back(i, cols++, 1.0);
            }
        }
    } else {
        // Anchors are the design boundary and the interface nodes.
        std::vector<int> anchors;
        std::vector<bool> free_anchor;
        for (int i = 0; i < nn; ++i) {
            const bool boundary = mesh.design_boundary[i];
            const bool interface = i > 0 && i < nn - 1 && mesh.phase[i - 1] != mesh.phase[i];
            if (boundary || interface) {
                anchors.push_back(i);
                free_anchor.push_back(!boundary);
            }
        }
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (!free_anchor[a]) {
                continue;
            }
            const int node = anchors[a];
            trip.emplace_back(node, cols, 1.0);
            if (a > 0) {
                const int lo = anchors[a - 1];
                for (int i = lo + 1; i < node; ++i) {
                    trip.emplace_back(i, cols, (mesh.nodes[i] - mesh.nodes[lo]) /
                                                   (mesh.nodes[node] - mesh.nodes[lo]));
                }
            }
            if (a + 1 < anchors.size()) {
                const int hi = anchors[a + 1];
                for (int i = node + 1; i < hi; ++i) {
                    trip.emplace_back(i, cols, (mesh.nodes[hi] - mesh.nodes[i]) /
                                                   (mesh.nodes[hi] - mesh.nodes[node]));
                }
            }
            ++cols;
        }
    }
    Eigen::SparseMatrix<double> P(nn, cols);
    P.setFromTriplets(trip.begin(), trip.end());
    return P;
}

}  // namespace

void DescentConfig::validate(int space_dim) const
{
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ConfigError("descent weights must satisfy alpha > 0 and beta >= 0");
    }
    if (alpha == 0.0) {
        throw ConfigError(beta == 0.0 ? "inner product is singular for alpha = beta = 0"
                                      : "descent weight alpha must be positive");
    }
    if (include_cauchy_riemann && space_dim != 2) {
        throw ConfigError("the Cauchy-Riemann term needs two space dimensions");
    }
    if (!(tau_min > 0.0) || !(tau_min < tau_init) || !std::isfinite(tau_init)) {
        throw ConfigError("step sizes must satisfy 0 < tau_min < tau_init");
    }
    if (!(theta_tol >= 0.0)) {
        throw ConfigError("theta_tol must be non-negative");
    }
    if (max_outer < 0 || max_halvings < 0) {
        throw ConfigError("iteration limits must be non-negative");
    }
}

Eigen::VectorXd hilbertian_direction(const SpatialMesh& mesh, const DerivativeDensities& densities,
                                     const DescentConfig& config)
{
    config.validate(1);
    const int n = mesh.num_elements();
    if (static_cast<int>(densities.g0.size()) != n) {
        throw ArgumentError("densities do not match the spatial mesh");
    }
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(n + 1);
    const Eigen::SparseMatrix<double> P = direction_basis(mesh, config.space);
    if (P.cols() == 0) {
        return direction;
    }
    const Eigen::VectorXd rhs = P.transpose() * densities.nodal_load(mesh);
    if (rhs.norm() == 0.0) {
        return direction;
    }
    const Eigen::SparseMatrix<double> Br = P.transpose() * inner_product_matrix(mesh, config) * P;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Br);
    if (ldlt.info() != Eigen::Success) {
        throw SolverError("inner product factorization failed");
    }
    const Eigen::VectorXd coeffs = ldlt.solve(rhs);
    direction = -(P * coeffs);
    return direction;
}

double hilbertian_norm(const SpatialMesh& mesh, const Eigen::VectorXd& theta,
                       const DescentConfig& config)
{
    const double b = theta.dot(inner_product_matrix(mesh, config) * theta);
    return std::sqrt(std::max(b, 0.0));
}

Evaluation evaluate_design(const ShapeProblem& problem, const SpaceTimeMesh& mesh,
                           const std::optional<Field>& warm_start)
{
    PhaseLayout layout(mesh.element_phases(), problem.materials);
    StateSolution st = solve_state(mesh, layout, problem.source, problem.newton, warm_start);
    const double J = evaluate_objective(mesh, st.u, problem.objective);
    return Evaluation{mesh, std::move(layout), std::move(st.u), J, st.iterations};
}

DerivativeDensities design_derivative(const ShapeProblem& problem, const Evaluation& design)
{
    const Field p = solve_adjoint(design.mesh, design.layout, design.u, problem.objective);
    return pde_volume_densities(design.mesh, design.layout, design.u, p, problem.source,
                                problem.objective, problem.derivative);
}

LineSearchResult line_search(const ShapeProblem& problem, const Evaluation& current,
                             const Eigen::VectorXd& direction, double tau0,
                             const DescentConfig& config)
{
    LineSearchResult r;
    double tau = tau0;
    for (int h = 0; h <= config.max_halvings && tau >= config.tau_min; ++h, tau *= 0.5) {
        r.halvings = h;
        std::optional<SpaceTimeMesh> trial;
        try {
            trial.emplace(deform_mesh(current.mesh, direction, tau));
        } catch (const InvertedElementError&) {
            ++r.inverted_trials;
            continue;
        }
        try {
            Evaluation e = evaluate_design(problem, *trial, current.u);
            if (e.J < current.J) {
                r.accepted = true;
                r.tau = tau;
                r.design.emplace(std::move(e));
                return r;
            }
        } catch (const SolverError&) {
            // A trial that the Newton solver cannot handle counts as rejected.
        }
    }
    return r;
}

std::string to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::ThetaTolerance:
        return "theta_tol";
    case StopReason::LineSearchFailure:
        return "line_search_failure";
    case StopReason::MaxIterations:
        return "max_outer";
    case StopReason::SolverFailure:
        return "solver_failure";
    }
    return "unknown";
}

OptimizationReport optimize(const ShapeProblem& problem, const DescentConfig& config,
                            const IterationCallback& on_iteration)
{
    config.validate(1);
    OptimizationReport report;
    try {
        Evaluation design = evaluate_design(problem, problem.mesh);
        report.final_design.emplace(design);
        double tau_prev = config.tau_init;
        for (int it = 0;; ++it) {
            const SpatialMesh smesh = design.mesh.spatial_mesh();
            const DerivativeDensities dens = design_derivative(problem, design);
            const Eigen::VectorXd direction = hilbertian_direction(smesh, dens, config);
            IterationRecord rec;
            rec.iteration = it;
            rec.J = design.J;
            rec.theta_norm = hilbertian_norm(smesh, direction, config);
            rec.newton_iterations = design.newton_iterations;

            auto finish = [&](StopReason reason) {
                report.history.push_back(rec);
                if (on_iteration) {
                    on_iteration(rec, design);
                }
                report.reason = reason;
            };
            if (rec.theta_norm <= config.theta_tol) {
                finish(StopReason::ThetaTolerance);
                break;
            }
            if (it >= config.max_outer) {
                finish(StopReason::MaxIterations);
                break;
            }
            const double tau0 = std::min(2.0 * tau_prev, config.tau_init);
            LineSearchResult ls = line_search(problem, design, direction, tau0, config);
            if (!ls.accepted) {
                finish(StopReason::LineSearchFailure);
                break;
            }
            rec.tau = ls.tau;
            tau_prev = ls.tau;
            report.history.push_back(rec);
            if (on_iteration) {
                on_iteration(rec, design);
            }
            design = std::move(*ls.design);
            report.final_design.emplace(design);
        }
    } catch (const Error& e) {
        report.reason = StopReason::SolverFailure;
        report.message = e.what();
    }
    return report;
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << "iter,J,theta_norm,tau,newton_iters\n";
    char line[160];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line, "%d,%.12e,%.12e,%.12e,%d\n", r.iteration, r.J,
                      r.theta_norm, r.tau, r.newton_iterations);
        out << line;
    }
    out.flush();
    if (!out) {
        throw IoError("failed while writing " + path);
    }
}

}  // namespace stshapeopt
