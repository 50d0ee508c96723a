#include "stshapeopt/fem.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/SparseLU>

#include "element.hpp"
#include "stshapeopt/error.hpp"

namespace stshapeopt {

using detail::at_point;
using detail::element_geometry;
using detail::element_gradient;
using detail::element_values;
using detail::ElementGeometry;

namespace {

std::string fmt_sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

}  // namespace

DofMap::DofMap(const SpaceTimeMesh& mesh) : map_(mesh.num_vertices(), -1)
{
    const int nx = mesh.n_x();
    const int nt = mesh.n_t();
    for (int k = 0; k < nt; ++k) {
        for (int i = 1; i < nx; ++i) {
            const int v = mesh.vertex_id(i, k);
            map_[v] = n_free_++;
            representative_.push_back(v);
        }
    }
    for (const auto& [bottom, top] : mesh.periodic_pairs()) {
        if (map_[bottom] < 0) {
            continue;
        }
        if (mesh.periodic_line(mesh.grid_i(bottom))) {
            map_[top] = map_[bottom];
        } else {
            map_[top] = n_free_++;
            representative_.push_back(top);
        }
    }
}

Eigen::VectorXd DofMap::to_nodal(const Eigen::VectorXd& free) const
{
    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map_.size()));
    for (std::size_t v = 0; v < map_.size(); ++v) {
        if (map_[v] >= 0) {
            nodal(static_cast<Eigen::Index>(v)) = free(map_[v]);
        }
    }
    return nodal;
}

Eigen::VectorXd DofMap::from_nodal(const Eigen::VectorXd& nodal) const
{
    Eigen::VectorXd free(n_free_);
    for (int d = 0; d < n_free_; ++d) {
        free(d) = nodal(representative_[d]);
    }
    return free;
}

void restrict_periodicity_to_conductors(SpaceTimeMesh& mesh, const MaterialLaw& materials)
{
    const auto& phases = mesh.column_phase();
    std::vector<bool> mask(mesh.n_x() + 1, false);
    for (int c = 0; c < mesh.n_x(); ++c) {
        if (materials.phase(phases[c]).sigma > 0.0) {
            mask[c] = true;
            mask[c + 1] = true;
        }
    }
    mesh.set_periodic_lines(std::move(mask));
}

Field Field::zero(const SpaceTimeMesh& mesh)
{
    DofMap dofs(mesh);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dofs.size());
    return Field{std::move(dofs), std::move(c)};
}

Field Field::interpolate(const SpaceTimeMesh& mesh, const std::function<double(double, double)>& g)
{
    Field f = zero(mesh);
    Eigen::VectorXd nodal(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        nodal(v) = g(mesh.vertex(v)(0), mesh.vertex(v)(1));
    }
    f.coeffs = f.dofs.from_nodal(nodal);
    return f;
}

Source Source::zero()
{
    return Source{[](double, double, int) { return 0.0; }, [](double, double, int) { return 0.0; }};
}

Source Source::from(std::function<double(double, double)> f, std::function<double(double, double)> fx)
{
    return Source{[f](double t, double x, int) { return f(t, x); },
                  [fx](double t, double x, int) { return fx(t, x); }};
}

Objective Objective::integral()
{
    return Objective{[](double u) { return u; }, [](double) { return 1.0; }};
}

Objective Objective::none()
{
    return Objective{[](double) { return 0.0; }, [](double) { return 0.0; }};
}

LinearSystem::LinearSystem(Eigen::SparseMatrix<double> matrix) : matrix_(std::move(matrix))
{
    matrix_.makeCompressed();
}

Eigen::VectorXd LinearSystem::solve(const Eigen::VectorXd& b) const
{
    if (b.size() != matrix_.rows()) {
        throw SolverError("right-hand side size does not match the matrix");
    }
    if (b.size() == 0) {
        return b;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(matrix_);
    if (lu.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd x = lu.solve(b);
    if (b.lpNorm<Eigen::Infinity>() == 0.0) {
        return x;
    }
    // Normwise backward error; one refinement step at a time while it misses the contract.
    Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(matrix_.rows());
    for (int k = 0; k < matrix_.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, k); it; ++it) {
            row_sum(it.row()) += std::abs(it.value());
        }
    }
    const double a_norm = row_sum.maxCoeff();
    auto backward_error = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& r) {
        return r.lpNorm<Eigen::Infinity>() /
               (a_norm * y.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
    };
    Eigen::VectorXd r = b - matrix_ * x;
    for (int step = 0; step < 3 && backward_error(x, r) > residual_tolerance; ++step) {
        x += lu.solve(r);
        r = b - matrix_ * x;
    }
    if (!x.allFinite() || !(backward_error(x, r) <= residual_tolerance)) {
        throw SolverError("linear solve backward error " + fmt_sci(backward_error(x, r)) +
                          " exceeds tolerance");
    }
    return x;
}

Eigen::VectorXd assemble_state_residual(const SpaceTimeMesh& mesh, const PhaseLayout& layout,
                                        const Field& u, const Source& f)
{
    Eigen::VectorXd r = Eigen::VectorXd::Zero(u.dofs.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const PhaseMaterial& mat = layout.material(e);
        const int phase = layout.phase(e);
        const auto uv = element_values(g, u);
        const auto du = element_gradient(g, uv);
        const double nu = mat.nu.evaluate(std::abs(du.x)).nu;
        std::array<double, 3> re{};
        for (int a = 0; a < 3; ++a) {
            re[a] = g.area * nu * du.x * g.dx[a];
        }
        for (const auto& q : g.q) {
            const double fq = f.value(q.t, q.x, phase);
            const double conv = mat.sigma * (du.t + q.v * du.x);
            for (int a = 0; a < 3; ++a) {
                re[a] += q.weight * (conv - fq) * q.lambda[a];
            }
        }
        for (int a = 0; a < 3; ++a) {
            if (!std::isfinite(re[a])) {
                throw AssemblyError("non-finite residual in element " + std::to_string(e), e);
            }
            const int d = u.dofs[g.vertex[a]];
            if (d >= 0) {
                r(d) += re[a];
            }
        }
    }
    return r;
}

Eigen::SparseMatrix<double> assemble_state_jacobian(const SpaceTimeMesh& mesh,
                                                    const PhaseLayout& layout, const Field& u)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * 9);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const PhaseMaterial& mat = layout.material(e);
        const auto uv = element_values(g, u);
        const auto du = element_gradient(g, uv);
        const double s = std::abs(du.x);
        const double nu = mat.nu.evaluate(s).nu;
        // Linearized tensor nu I + (nu'/|g|) g g^T, in one space dimension.
        const double nu_lin = nu + mat.nu.dnu_over_s(s) * du.x * du.x;
        for (int a = 0; a < 3; ++a) {
            const int da = u.dofs[g.vertex[a]];
            if (da < 0) {
                continue;
            }
            for (int b = 0; b < 3; ++b) {
                const int db = u.dofs[g.vertex[b]];
                if (db < 0) {
                    continue;
                }
                double k = g.area * nu_lin * g.dx[b] * g.dx[a];
                for (const auto& q : g.q) {
                    k += q.weight * mat.sigma * (g.dt[b] + q.v * g.dx[b]) * q.lambda[a];
                }
                if (!std::isfinite(k)) {
                    throw AssemblyError("non-finite Jacobian entry in element " + std::to_string(e), e);
                }
                trip.emplace_back(da, db, k);
            }
        }
    }
    Eigen::SparseMatrix<double> A(u.dofs.size(), u.dofs.size());
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

StateSolution solve_state(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Source& f,
                          const NewtonOptions& options, const std::optional<Field>& initial)
{
    StateSolution sol{Field::zero(mesh), 0, {}};
    const double r0 = assemble_state_residual(mesh, layout, sol.u, f).norm();
    if (initial) {
        if (initial->coeffs.size() != sol.u.dofs.size()) {
            throw SolverError("initial guess does not match the DOF map");
        }
        sol.u.coeffs = initial->coeffs;
    }
    if (r0 == 0.0 && !initial) {
        sol.residual_history.push_back(0.0);
        return sol;
    }
    const double target = options.tol * r0;

    Eigen::VectorXd r = assemble_state_residual(mesh, layout, sol.u, f);
    double rnorm = r.norm();
    sol.residual_history.push_back(rnorm);
    while (rnorm > target) {
        if (sol.iterations >= options.max_iter) {
            throw NonconvergenceError("Newton reached the iteration cap", rnorm);
        }
        const LinearSystem sys(assemble_state_jacobian(mesh, layout, sol.u));
        const Eigen::VectorXd step = sys.solve(-r);
        if (step.lpNorm<Eigen::Infinity>() <=
            options.step_tol * sol.u.coeffs.lpNorm<Eigen::Infinity>()) {
            // The update is at roundoff level, so the residual is as small as it can get.
            break;
        }
        double lambda = 1.0;
        int halvings = 0;
        Field trial = sol.u;
        Eigen::VectorXd r_trial;
        double trial_norm = 0.0;
        while (true) {
            trial.coeffs = sol.u.coeffs + lambda * step;
            r_trial = assemble_state_residual(mesh, layout, trial, f);
            trial_norm = r_trial.norm();
            if (trial_norm < rnorm || trial_norm <= target) {
                break;
            }
            if (halvings >= options.max_halvings) {
                throw NonconvergenceError("Newton damping exhausted the halving budget", rnorm);
            }
            lambda *= 0.5;
            ++halvings;
            if (lambda < options.min_damping) {
                throw NonconvergenceError("Newton damping factor underflow", rnorm);
            }
        }
        sol.u = std::move(trial);
        r = std::move(r_trial);
        rnorm = trial_norm;
        ++sol.iterations;
        sol.residual_history.push_back(rnorm);
    }
    return sol;
}

double evaluate_objective(const SpaceTimeMesh& mesh, const Field& u, const Objective& obj)
{
    double J = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, false);
        const auto uv = element_values(g, u);
        for (const auto& q : g.q) {
            J += q.weight * obj.j(at_point(q, uv));
        }
    }
    return J;
}

Eigen::VectorXd objective_gradient(const SpaceTimeMesh& mesh, const Field& u, const Objective& obj)
{
    Eigen::VectorXd gvec = Eigen::VectorXd::Zero(u.dofs.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, false);
        const auto uv = element_values(g, u);
        for (const auto& q : g.q) {
            const double dj = obj.dj(at_point(q, uv));
            for (int a = 0; a < 3; ++a) {
                const int d = u.dofs[g.vertex[a]];
                if (d >= 0) {
                    gvec(d) += q.weight * dj * q.lambda[a];
                }
            }
        }
    }
    return gvec;
}

Field solve_adjoint(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                    const Objective& obj)
{
    const Eigen::VectorXd gvec = objective_gradient(mesh, u, obj);
    Field p = Field::zero(mesh);
    if (gvec.norm() == 0.0) {
        return p;
    }
    Eigen::SparseMatrix<double> At = assemble_state_jacobian(mesh, layout, u).transpose();
    const LinearSystem sys(std::move(At));
    p.coeffs = sys.solve(-gvec);
    return p;
}

double time_form(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u, const Field& p)
{
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const double sigma = layout.material(e).sigma;
        const auto du = element_gradient(g, element_values(g, u));
        const auto pv = element_values(g, p);
        for (const auto& q : g.q) {
            sum += q.weight * sigma * (du.t + q.v * du.x) * at_point(q, pv);
        }
    }
    return sum;
}

double divergence_form(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                       const Field& p)
{
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const double sigma = layout.material(e).sigma;
        const auto uv = element_values(g, u);
        const auto pv = element_values(g, p);
        for (const auto& q : g.q) {
            sum += q.weight * sigma * q.vx * at_point(q, uv) * at_point(q, pv);
        }
    }
    return sum;
}

ErrorNorms error_norms(const SpaceTimeMesh& mesh, const Field& u,
                       const std::function<double(double, double)>& exact,
                       const std::function<double(double, double)>& exact_dx)
{
    double l2 = 0.0;
    double h1 = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, false);
        const auto uv = element_values(g, u);
        const auto du = element_gradient(g, uv);
        const Eigen::Vector2d& a = mesh.vertex(g.vertex[0]);
        const Eigen::Vector2d& b = mesh.vertex(g.vertex[1]);
        const Eigen::Vector2d& c = mesh.vertex(g.vertex[2]);
        for (const auto& q : degree5_rule()) {
            const Eigen::Vector2d pt = q.lambda[0] * a + q.lambda[1] * b + q.lambda[2] * c;
            const double uh = q.lambda[0] * uv[0] + q.lambda[1] * uv[1] + q.lambda[2] * uv[2];
            const double w = q.weight * g.area;
            const double d0 = uh - exact(pt(0), pt(1));
            const double d1 = du.x - exact_dx(pt(0), pt(1));
            l2 += w * d0 * d0;
            h1 += w * d1 * d1;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace stshapeopt
