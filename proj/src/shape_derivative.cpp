#include "stshapeopt/shape_derivative.hpp"

#include <cmath>
#include <string>

#include "element.hpp"
#include "stshapeopt/error.hpp"

namespace stshapeopt {

using detail::at_point;
using detail::element_geometry;
using detail::element_gradient;
using detail::element_values;
using detail::ElementGeometry;
using detail::PointPerturbation;
using detail::QuadPoint;
using detail::vec1;

namespace {

/**
 * @brief Weights of a pointwise integrand S = cm m' + cF F'_xx + cFt F'_xt + cv1 v_1 + cf1 f_1.
 */
struct Weights {
    double cm = 0.0;
    double cF = 0.0;
    double cFt = 0.0;
    double cv1 = 0.0;
    double cf1 = 0.0;

    std::array<double, 2> apply(const PointPerturbation& p) const
    {
        std::array<double, 2> r{};
        for (int s = 0; s < 2; ++s) {
            r[s] = cm * p.m[s] + cF * p.Fxx[s] + cFt * p.Fxt[s] + cv1 * p.v1[s] + cf1 * p.f1[s];
        }
        return r;
    }

    PullbackLinearForm<1> apply(const KernelPoint<1>& kp, double f_x, double v_x) const
    {
        Mat<1> jv;
        jv(0, 0) = v_x;
        PullbackLinearForm<1> r = cm * m_prime(kp);
        r += cF * Fxx_prime(kp)[0][0];
        r += cFt * Fxt_prime(kp)[0];
        r += cv1 * pullback_vector_derivative(jv, kp)[0];
        r += cf1 * pullback_scalar_derivative(vec1(f_x), kp);
        return r;
    }
};

/** @brief Pointwise state/adjoint data entering the PDE volume form. */
struct StatePoint {
    double sigma = 0.0;
    double nu = 0.0;
    double dnu_over_s = 0.0;
    double ut = 0.0;
    double ux = 0.0;
    double u = 0.0;
    double v = 0.0;
    double f = 0.0;
};

/**
 * @brief Weights of the volume form for test data (w, w_x): the shape
 * derivative of the state residual tested with w, plus jval m'.
 */
Weights pde_weights(const StatePoint& s, double w, double wx, double jval)
{
    Weights c;
    const double conv = s.ut + s.v * s.ux;
    c.cm = jval + s.sigma * conv * w - s.f * w + s.nu * s.ux * wx;
    c.cF = -s.sigma * s.v * s.ux * w - 2.0 * s.nu * s.ux * wx -
           s.dnu_over_s * s.ux * s.ux * s.ux * wx;
    c.cFt = -s.sigma * s.ux * w;
    c.cv1 = s.sigma * s.ux * w;
    c.cf1 = -w;
    return c;
}

PointPerturbation perturbation(const SpaceTimeMesh& mesh, DeformationModel model,
                               const ElementGeometry& g, const detail::VertexRates& rates,
                               int column, const QuadPoint& q, double f_x)
{
    if (model == DeformationModel::Pullback) {
        return detail::pullback_perturbation(mesh, column, q, f_x);
    }
    return detail::interpolant_perturbation(g, rates, q, f_x);
}

double theta_dot(const std::array<double, 2>& c, const Eigen::VectorXd& theta, int column)
{
    return c[0] * theta(column) + c[1] * theta(column + 1);
}

StatePoint state_point(const PhaseMaterial& mat, const detail::ElementGradient& du, double u,
                       double v, double f)
{
    StatePoint s;
    s.sigma = mat.sigma;
    const double mag = std::abs(du.x);
    s.nu = mat.nu.evaluate(mag).nu;
    s.dnu_over_s = mat.nu.dnu_over_s(mag);
    s.ut = du.t;
    s.ux = du.x;
    s.u = u;
    s.v = v;
    s.f = f;
    return s;
}

void check_theta(const SpaceTimeMesh& mesh, const Eigen::VectorXd& theta)
{
    if (theta.size() != mesh.n_x() + 1) {
        throw ArgumentError("theta must hold one value per spatial node");
    }
}

}  // namespace

DerivativeDensities DerivativeDensities::zero(int n_elements, std::string functional,
                                              DerivativeOptions o)
{
    DerivativeDensities d;
    d.g0.assign(n_elements, 0.0);
    d.g1.assign(n_elements, 0.0);
    d.functional = std::move(functional);
    d.options = o;
    return d;
}

DerivativeDensities DerivativeDensities::from_nodal_loads(const SpatialMesh& mesh,
                                                          const std::vector<double>& left,
                                                          const std::vector<double>& right,
                                                          std::string functional,
                                                          DerivativeOptions o)
{
    DerivativeDensities d = zero(mesh.num_elements(), std::move(functional), o);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        d.g0[e] = (left[e] + right[e]) / mesh.length(e);
        d.g1[e] = 0.5 * (right[e] - left[e]);
    }
    return d;
}

double DerivativeDensities::pair(const SpatialMesh& mesh, const Eigen::VectorXd& theta) const
{
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.length(e);
        sum += g0[e] * h * 0.5 * (theta(e) + theta(e + 1)) + g1[e] * (theta(e + 1) - theta(e));
    }
    return sum;
}

Eigen::VectorXd DerivativeDensities::nodal_load(const SpatialMesh& mesh) const
{
    Eigen::VectorXd G = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.length(e);
        G(e) += 0.5 * h * g0[e] - g1[e];
        G(e + 1) += 0.5 * h * g0[e] + g1[e];
    }
    return G;
}

DerivativeDensities& DerivativeDensities::operator+=(const DerivativeDensities& other)
{
    if (other.g0.size() != g0.size()) {
        throw ArgumentError("density sizes differ");
    }
    for (std::size_t e = 0; e < g0.size(); ++e) {
        g0[e] += other.g0[e];
        g1[e] += other.g1[e];
    }
    return *this;
}

DerivativeDensities pde_volume_densities(const SpaceTimeMesh& mesh, const PhaseLayout& layout,
                                         const Field& u, const Field& p, const Source& f,
                                         const Objective& obj, const DerivativeOptions& options)
{
    const SpatialMesh smesh = mesh.spatial_mesh();
    const int ne = smesh.num_elements();

    if (options.quadrature == DensityQuadrature::CentroidTrapezoid) {
        if (options.model != DeformationModel::Pullback) {
            throw UnsupportedCaseError("centroid densities require the pullback deformation model");
        }
        DerivativeDensities d = DerivativeDensities::zero(ne, "pde", options);
        const Motion1& motion = mesh.motion();
        for (int e = 0; e < ne; ++e) {
            const double xc = 0.5 * (smesh.nodes[e] + smesh.nodes[e + 1]);
            for (const TrajectoryPiece& piece : vertical_line_elements(mesh, xc)) {
                const ElementGeometry g = element_geometry(mesh, piece.element, false);
                const PhaseMaterial& mat = layout.material(piece.element);
                const int phase = layout.phase(piece.element);
                const auto uv = element_values(g, u);
                const auto pv = element_values(g, p);
                const auto du = element_gradient(g, uv);
                const auto dp = element_gradient(g, pv);
                for (const double t : {piece.t0, piece.t1}) {
                    const double X = motion.forward(t, vec1(xc))(0);
                    const auto lam = barycentric(mesh, piece.element, Eigen::Vector2d(t, X));
                    const double uq = lam[0] * uv[0] + lam[1] * uv[1] + lam[2] * uv[2];
                    const double pq = lam[0] * pv[0] + lam[1] * pv[1] + lam[2] * pv[2];
                    const KernelPoint<1> kp(motion, t, vec1(X));
                    const double v = motion.dt(t, kp.y)(0);
                    const double vx = motion.grad_dt(t, kp.y)(0, 0) / kp.G(0, 0);
                    const StatePoint s = state_point(mat, du, uq, v, f.value(t, X, phase));
                    const Weights c = pde_weights(s, pq, dp.x, obj.j(uq));
                    const PullbackLinearForm<1> form = c.apply(kp, f.dx(t, X, phase), vx);
                    const double w = 0.5 * (piece.t1 - piece.t0) * std::abs(kp.G(0, 0));
                    d.g0[e] += w * form.a(0);
                    d.g1[e] += w * form.B(0, 0);
                }
            }
        }
        return d;
    }

    std::vector<double> left(ne, 0.0), right(ne, 0.0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const int column = mesh.element(e).column;
        const PhaseMaterial& mat = layout.material(e);
        const int phase = layout.phase(e);
        const auto uv = element_values(g, u);
        const auto pv = element_values(g, p);
        const auto du = element_gradient(g, uv);
        const auto dp = element_gradient(g, pv);
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const double uq = at_point(q, uv);
            const StatePoint s = state_point(mat, du, uq, q.v, f.value(q.t, q.x, phase));
            const Weights c = pde_weights(s, at_point(q, pv), dp.x, obj.j(uq));
            const auto pert =
                perturbation(mesh, options.model, g, rates, column, q, f.dx(q.t, q.x, phase));
            const auto nodal = c.apply(pert);
            left[column] += q.weight * nodal[0];
            right[column] += q.weight * nodal[1];
        }
    }
    return DerivativeDensities::from_nodal_loads(smesh, left, right, "pde", options);
}

double pde_volume_derivative(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                             const Field& p, const Source& f, const Objective& obj,
                             const Eigen::VectorXd& theta, DeformationModel model)
{
    check_theta(mesh, theta);
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const int column = mesh.element(e).column;
        const PhaseMaterial& mat = layout.material(e);
        const int phase = layout.phase(e);
        const auto uv = element_values(g, u);
        const auto pv = element_values(g, p);
        const auto du = element_gradient(g, uv);
        const auto dp = element_gradient(g, pv);
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const auto pert = perturbation(mesh, model, g, rates, column, q, f.dx(q.t, q.x, phase));
            const double m = theta_dot(pert.m, theta, column);
            const double F = theta_dot(pert.Fxx, theta, column);
            const double Ft = theta_dot(pert.Fxt, theta, column);
            const double v1 = theta_dot(pert.v1, theta, column);
            const double f1 = theta_dot(pert.f1, theta, column);
            const double uq = at_point(q, uv);
            const double pq = at_point(q, pv);
            const StatePoint s = state_point(mat, du, uq, q.v, f.value(q.t, q.x, phase));
            // m' j(u) + sigma (m' du/dt - F'_xx v u_x + v_1 u_x + b' u_x) p
            //   + (nu A' - (nu'/|g|) F'_xx g g) g p_x - (m' f + f_1) p
            const double time_term =
                s.sigma * (m * (s.ut + s.v * s.ux) - F * s.v * s.ux + v1 * s.ux - Ft * s.ux) * pq;
            const double diff_term =
                (s.nu * (m - 2.0 * F) - s.dnu_over_s * F * s.ux * s.ux) * s.ux * dp.x;
            sum += q.weight * (m * obj.j(uq) + time_term + diff_term - (m * s.f + f1) * pq);
        }
    }
    return sum;
}

Field solve_tangent(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                    const Source& f, const Eigen::VectorXd& theta, DeformationModel model)
{
    check_theta(mesh, theta);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(u.dofs.size());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, true);
        const int column = mesh.element(e).column;
        const PhaseMaterial& mat = layout.material(e);
        const int phase = layout.phase(e);
        const auto uv = element_values(g, u);
        const auto du = element_gradient(g, uv);
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const StatePoint s =
                state_point(mat, du, at_point(q, uv), q.v, f.value(q.t, q.x, phase));
            const auto pert = perturbation(mesh, model, g, rates, column, q, f.dx(q.t, q.x, phase));
            for (int a = 0; a < 3; ++a) {
                const int d = u.dofs[g.vertex[a]];
                if (d < 0) {
                    continue;
                }
                const Weights c = pde_weights(s, q.lambda[a], g.dx[a], 0.0);
                rhs(d) -= q.weight * theta_dot(c.apply(pert), theta, column);
            }
        }
    }
    Field ud = Field::zero(mesh);
    if (rhs.norm() == 0.0) {
        return ud;
    }
    const LinearSystem sys(assemble_state_jacobian(mesh, layout, u));
    ud.coeffs = sys.solve(rhs);
    return ud;
}

double tangent_derivative(const SpaceTimeMesh& mesh, const Field& u, const Field& u_dot,
                          const Objective& obj, const Eigen::VectorXd& theta,
                          DeformationModel model)
{
    check_theta(mesh, theta);
    double sum = objective_gradient(mesh, u, obj).dot(u_dot.coeffs);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(mesh, e, model == DeformationModel::MeshInterpolant);
        const int column = mesh.element(e).column;
        const auto uv = element_values(g, u);
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const auto pert = perturbation(mesh, model, g, rates, column, q, 0.0);
            sum += q.weight * theta_dot(pert.m, theta, column) * obj.j(at_point(q, uv));
        }
    }
    return sum;
}

std::vector<InterfaceDensity> pde_surface_derivative(const SpaceTimeMesh& mesh,
                                                     const PhaseLayout& layout, const Field& u,
                                                     const Field& p, int design_phase)
{
    if (!layout.materials().is_linear()) {
        throw UnsupportedCaseError("the surface form is only available for constant reluctivities");
    }
    const Motion1& motion = mesh.motion();
    const auto& cphase = mesh.column_phase();
    std::vector<InterfaceDensity> out;
    for (const int node : mesh.interface_nodes()) {
        const int lcol = node - 1;
        const int rcol = node;
        const bool omega_left = cphase[lcol] == design_phase;
        const bool omega_right = cphase[rcol] == design_phase;
        if (omega_left == omega_right) {
            continue;
        }
        InterfaceDensity dens;
        dens.node = node;
        dens.xi = mesh.xi()[node];
        dens.normal = omega_left ? 1.0 : -1.0;
        const int in_col = omega_left ? lcol : rcol;
        const int out_col = omega_left ? rcol : lcol;
        const PhaseMaterial& m1 = layout.materials().phase(cphase[in_col]);
        const PhaseMaterial& m2 = layout.materials().phase(cphase[out_col]);
        const double nu1 = m1.nu.value();
        const double nu2 = m2.nu.value();

        double v = 0.0;
        for (int k = 0; k < mesh.n_t(); ++k) {
            const int ea = mesh.element_touching(lcol, k, node);
            const int eb = mesh.element_touching(rcol, k, node);
            const ElementGeometry ga = element_geometry(mesh, ea, false);
            const ElementGeometry gb = element_geometry(mesh, eb, false);
            const auto dua = element_gradient(ga, element_values(ga, u));
            const auto dub = element_gradient(gb, element_values(gb, u));
            const auto dpa = element_gradient(ga, element_values(ga, p));
            const auto dpb = element_gradient(gb, element_values(gb, p));
            const double nua = layout.material(ea).nu.value();
            const double nub = layout.material(eb).nu.value();
            const int v0 = mesh.vertex_id(node, k);
            const int v1 = mesh.vertex_id(node, k + 1);
            const Eigen::Vector2d& P0 = mesh.vertex(v0);
            const Eigen::Vector2d& P1 = mesh.vertex(v1);
            const double p0 = p.vertex_value(v0);
            const double p1 = p.vertex_value(v1);
            for (const auto& gq : gauss2_unit()) {
                const double s = gq[0];
                const Eigen::Vector2d pt = (1.0 - s) * P0 + s * P1;
                const double t = pt(0);
                const double vel = motion.velocity(t, vec1(pt(1)))(0);
                const double pq = (1.0 - s) * p0 + s * p1;
                const double dudt = 0.5 * ((dua.t + vel * dua.x) + (dub.t + vel * dub.x));
                const double flux_u = 0.5 * (nua * dua.x + nub * dub.x);
                const double flux_p = 0.5 * (nua * dpa.x + nub * dpb.x);
                const double det = std::abs(motion.grad(t, vec1(dens.xi))(0, 0));
                const double w = gq[1] * (P1(0) - P0(0)) * det;
                v += w * (-(m2.sigma - m1.sigma) * dudt * pq + (1.0 / nu2 - 1.0 / nu1) * flux_u * flux_p);
            }
        }
        dens.v = v;
        out.push_back(dens);
    }
    return out;
}

double pair_surface(const std::vector<InterfaceDensity>& dens, const Eigen::VectorXd& theta)
{
    double sum = 0.0;
    for (const auto& d : dens) {
        sum += d.v * theta(d.node) * d.normal;
    }
    return sum;
}

double academic_objective(const SmoothScalarField<1>& f, const SpaceTimeMesh& mesh,
                          const std::vector<int>& phases)
{
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (std::find(phases.begin(), phases.end(), mesh.element(e).phase) == phases.end()) {
            continue;
        }
        const ElementGeometry g = element_geometry(mesh, e, false);
        for (const QuadPoint& q : g.q) {
            sum += q.weight * f.value(q.t, vec1(q.x));
        }
    }
    return sum;
}

double academic_volume_derivative(const SmoothScalarField<1>& f, const SpaceTimeMesh& mesh,
                                  const std::vector<int>& phases, const Eigen::VectorXd& theta,
                                  DeformationModel model)
{
    check_theta(mesh, theta);
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (std::find(phases.begin(), phases.end(), mesh.element(e).phase) == phases.end()) {
            continue;
        }
        const ElementGeometry g = element_geometry(mesh, e, false);
        const int column = mesh.element(e).column;
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const double fx = f.grad(q.t, vec1(q.x))(0);
            const auto pert = perturbation(mesh, model, g, rates, column, q, fx);
            const double m = theta_dot(pert.m, theta, column);
            const double f1 = theta_dot(pert.f1, theta, column);
            sum += q.weight * (m * f.value(q.t, vec1(q.x)) + f1);
        }
    }
    return sum;
}

double academic_surface_derivative(const SmoothScalarField<1>& f,
                                   const std::vector<InterfacePoint>& points, const Motion1& motion,
                                   double T, int n_steps)
{
    if (n_steps < 1 || !(T > 0.0)) {
        throw ArgumentError("surface form needs T > 0 and at least one time step");
    }
    double sum = 0.0;
    for (const auto& pt : points) {
        double v = 0.0;
        for (int k = 0; k <= n_steps; ++k) {
            const double t = T * k / n_steps;
            const double w = (k == 0 || k == n_steps) ? 0.5 : 1.0;
            const Vec<1> xr = vec1(pt.xi);
            v += w * std::abs(motion.det(t, xr)) * f.value(t, motion.forward(t, xr));
        }
        v *= T / n_steps;
        sum += v * pt.theta * pt.normal;
    }
    return sum;
}

DerivativeDensities magnetization_supplement(const SpaceTimeMesh& mesh,
                                             const SmoothScalarField<1>& L, const Field& p,
                                             const std::vector<int>& mag_phases,
                                             const DerivativeOptions& options)
{
    const SpatialMesh smesh = mesh.spatial_mesh();
    const int ne = smesh.num_elements();
    std::vector<double> left(ne, 0.0), right(ne, 0.0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (std::find(mag_phases.begin(), mag_phases.end(), mesh.element(e).phase) ==
            mag_phases.end()) {
            continue;
        }
        const ElementGeometry g = element_geometry(mesh, e, false);
        const int column = mesh.element(e).column;
        const auto dp = element_gradient(g, element_values(g, p));
        const auto rates = detail::vertex_rates(mesh, g, column);
        for (const QuadPoint& q : g.q) {
            const double Lq = L.value(q.t, vec1(q.x));
            const double Lx = L.grad(q.t, vec1(q.x))(0);
            // -(m' L + L_1 - F'_xx L) p_x, with L_1 carried in the f_1 slot.
            Weights c;
            c.cm = -Lq * dp.x;
            c.cF = Lq * dp.x;
            c.cf1 = -dp.x;
            const auto pert = perturbation(mesh, options.model, g, rates, column, q, Lx);
            const auto nodal = c.apply(pert);
            left[column] += q.weight * nodal[0];
            right[column] += q.weight * nodal[1];
        }
    }
    DerivativeOptions o = options;
    o.quadrature = DensityQuadrature::ElementMoments;
    return DerivativeDensities::from_nodal_loads(smesh, left, right, "magnetization", o);
}

}  // namespace stshapeopt
