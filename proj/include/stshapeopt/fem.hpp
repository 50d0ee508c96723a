/**
 * @brief Space-time P1 finite elements for the state, adjoint and tangent problems.
 *
 * State equation, tested with every P1 basis function w of the periodic space:
 *   int_Q sigma (du/dt + v du/dx) w + nu(|du/dx|) du/dx dw/dx - f w = 0,
 * with u = 0 on the lateral boundary and u(0, xi) = u(T, phi_T(xi)).
 * All forms use the edge-midpoint rule on each triangle.
 */
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "stshapeopt/materials.hpp"
#include "stshapeopt/spacetime_mesh.hpp"

namespace stshapeopt {

/**
 * @brief Free-DOF numbering: lateral vertices are Dirichlet (-1); on periodic
 * grid lines the top vertex aliases the DOF of its paired bottom vertex, on the
 * others it carries its own DOF.
 */
class DofMap {
public:
    explicit DofMap(const SpaceTimeMesh& mesh);

    int size() const { return n_free_; }
    int operator[](int vertex) const { return map_[vertex]; }
    const std::vector<int>& map() const { return map_; }

    /** @brief Nodal values over all vertices from free coefficients. */
    Eigen::VectorXd to_nodal(const Eigen::VectorXd& free) const;
    /** @brief Free coefficients from nodal values (bottom/interior vertices are read). */
    Eigen::VectorXd from_nodal(const Eigen::VectorXd& nodal) const;

private:
    std::vector<int> map_;
    std::vector<int> representative_;
    int n_free_ = 0;
};

/**
 * @brief Keeps the time-periodicity only on grid lines bounding a column with
 * positive conductivity. Where sigma vanishes the problem is elliptic in each
 * time slice and u(0, xi) = u(T, phi_T(xi)) does not hold in general.
 */
void restrict_periodicity_to_conductors(SpaceTimeMesh& mesh, const MaterialLaw& materials);

/** @brief P1 field on the periodic space: free coefficients plus their DOF map. */
struct Field {
    DofMap dofs;
    Eigen::VectorXd coeffs;

    static Field zero(const SpaceTimeMesh& mesh);
    /** @brief Nodal interpolant of g(t, x); lateral values forced to 0, top values from bottom. */
    static Field interpolate(const SpaceTimeMesh& mesh, const std::function<double(double, double)>& g);

    double vertex_value(int v) const { return dofs[v] < 0 ? 0.0 : coeffs(dofs[v]); }
    Eigen::VectorXd nodal() const { return dofs.to_nodal(coeffs); }
};

/** @brief Source term f(t, x) on Q and its x-derivative; the phase id of the element is passed along. */
struct Source {
    std::function<double(double, double, int)> value;
    std::function<double(double, double, int)> dx;

    static Source zero();
    /** @brief Phase independent source from f and df/dx. */
    static Source from(std::function<double(double, double)> f, std::function<double(double, double)> fx);
};

/** @brief Objective integrand j(u) and its derivative. */
struct Objective {
    std::function<double(double)> j;
    std::function<double(double)> dj;

    /** @brief j(u) = u. */
    static Objective integral();
    /** @brief j(u) = 0. */
    static Objective none();
};

struct NewtonOptions {
    double tol = 1e-10;        ///< relative to the residual at u = 0
    double step_tol = 1e-12;   ///< also converged once |du| <= step_tol |u| (infinity norms)
    int max_iter = 50;
    int max_halvings = 30;
    double min_damping = 1e-6;
};

struct StateSolution {
    Field u;
    int iterations = 0;
    std::vector<double> residual_history;  ///< absolute residual norms, one per iterate
};

/** @brief Sparse matrix with a direct factorization behind solve(). */
class LinearSystem {
public:
    LinearSystem() = default;
    explicit LinearSystem(Eigen::SparseMatrix<double> matrix);

    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
    int size() const { return static_cast<int>(matrix_.rows()); }

    /**
     * @brief Solves A x = b; throws SolverError on singularity or when the normwise
     * backward error |b - A x| / (|A| |x| + |b|) (infinity norms) exceeds 1e-12.
     */
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    static constexpr double residual_tolerance = 1e-12;

private:
    Eigen::SparseMatrix<double> matrix_;
};

/** @brief Weak-form residual over the free DOFs. Throws AssemblyError on non-finite entries. */
Eigen::VectorXd assemble_state_residual(const SpaceTimeMesh& mesh, const PhaseLayout& layout,
                                        const Field& u, const Source& f);

/** @brief Gateaux derivative of the residual with respect to the free DOFs. */
Eigen::SparseMatrix<double> assemble_state_jacobian(const SpaceTimeMesh& mesh,
                                                    const PhaseLayout& layout, const Field& u);

/** @brief Damped Newton iteration; throws NonconvergenceError. */
StateSolution solve_state(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Source& f,
                          const NewtonOptions& options = {},
                          const std::optional<Field>& initial = std::nullopt);

/** @brief J = int_Q j(u). */
double evaluate_objective(const SpaceTimeMesh& mesh, const Field& u, const Objective& obj);

/** @brief Load vector g_a = int_Q j'(u) w_a over the free DOFs. */
Eigen::VectorXd objective_gradient(const SpaceTimeMesh& mesh, const Field& u, const Objective& obj);

/**
 * @brief Adjoint state: A(u)^T p = -g with A the state Jacobian and g the
 * objective load, i.e. the transposed linearized operator on the periodic space.
 */
Field solve_adjoint(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                    const Objective& obj);

/** @brief int_Q sigma (du/dt + v du/dx) p, the convective time term. */
double time_form(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u, const Field& p);
/** @brief int_Q sigma (div v) u p. */
double divergence_form(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                       const Field& p);

/** @brief L2(Q) and H1-seminorm (spatial gradient) errors of u against an exact solution. */
struct ErrorNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};
ErrorNorms error_norms(const SpaceTimeMesh& mesh, const Field& u,
                       const std::function<double(double, double)>& exact,
                       const std::function<double(double, double)>& exact_dx);

}  // namespace stshapeopt
