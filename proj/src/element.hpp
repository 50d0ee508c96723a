/**
 * @brief Per-element geometry and shape-perturbation coefficients shared by the
 * state assembly and the shape derivative code. Internal header.
 */
#pragma once

#include <array>

#include <Eigen/Dense>

#include "stshapeopt/fem.hpp"
#include "stshapeopt/motion_kernel.hpp"
#include "stshapeopt/quadrature.hpp"
#include "stshapeopt/shape_derivative.hpp"

namespace stshapeopt::detail {

inline Vec<1> vec1(double x)
{
    Vec<1> v;
    v(0) = x;
    return v;
}

struct QuadPoint {
    double t = 0.0;
    double x = 0.0;
    double weight = 0.0;  ///< includes the element area
    std::array<double, 3> lambda{};
    double v = 0.0;   ///< motion velocity at (t, x)
    double vx = 0.0;  ///< its x-derivative
};

struct ElementGeometry {
    std::array<int, 3> vertex{};
    double area = 0.0;
    std::array<double, 3> dt{};  ///< d lambda_a / dt
    std::array<double, 3> dx{};  ///< d lambda_a / dx
    std::array<QuadPoint, 3> q;
};

inline ElementGeometry element_geometry(const SpaceTimeMesh& mesh, int e, bool with_velocity)
{
    ElementGeometry g;
    g.vertex = mesh.element(e).v;
    const Eigen::Vector2d& a = mesh.vertex(g.vertex[0]);
    const Eigen::Vector2d& b = mesh.vertex(g.vertex[1]);
    const Eigen::Vector2d& c = mesh.vertex(g.vertex[2]);
    const double det = (b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1));
    g.area = 0.5 * det;
    // Gradients of the barycentric coordinates in the (t, x) plane.
    const std::array<Eigen::Vector2d, 3> p{a, b, c};
    for (int j = 0; j < 3; ++j) {
        const Eigen::Vector2d& p1 = p[(j + 1) % 3];
        const Eigen::Vector2d& p2 = p[(j + 2) % 3];
        g.dt[j] = (p1(1) - p2(1)) / det;
        g.dx[j] = (p2(0) - p1(0)) / det;
    }
    const auto& rule = midpoint_rule();
    const Motion1& motion = mesh.motion();
    const bool moving = motion.kind() != MotionKind::Identity;
    for (int r = 0; r < 3; ++r) {
        QuadPoint& qp = g.q[r];
        qp.lambda = rule[r].lambda;
        qp.weight = rule[r].weight * g.area;
        const Eigen::Vector2d pt = qp.lambda[0] * a + qp.lambda[1] * b + qp.lambda[2] * c;
        qp.t = pt(0);
        qp.x = pt(1);
        if (with_velocity && moving) {
            const Vec<1> xr = motion.inverse(qp.t, vec1(qp.x));
            const double G = motion.grad(qp.t, xr)(0, 0);
            qp.v = motion.dt(qp.t, xr)(0);
            qp.vx = motion.grad_dt(qp.t, xr)(0, 0) / G;
        }
    }
    return g;
}

/** @brief Element-constant gradient (du/dt, du/dx) of a P1 field given its nodal values. */
struct ElementGradient {
    double t = 0.0;
    double x = 0.0;
};

inline ElementGradient element_gradient(const ElementGeometry& g, const std::array<double, 3>& val)
{
    ElementGradient d;
    for (int j = 0; j < 3; ++j) {
        d.t += val[j] * g.dt[j];
        d.x += val[j] * g.dx[j];
    }
    return d;
}

inline std::array<double, 3> element_values(const ElementGeometry& g, const Field& u)
{
    return {u.vertex_value(g.vertex[0]), u.vertex_value(g.vertex[1]), u.vertex_value(g.vertex[2])};
}

inline double at_point(const QuadPoint& q, const std::array<double, 3>& val)
{
    return q.lambda[0] * val[0] + q.lambda[1] * val[1] + q.lambda[2] * val[2];
}

/**
 * @brief Derivatives at tau = 0 of the transported coefficients at one
 * quadrature point, as linear functions of the nodal values (theta_L,
 * theta_R) of the column containing the element. Index 0 pairs with theta_L,
 * index 1 with theta_R.
 */
struct PointPerturbation {
    std::array<double, 2> m{};    ///< m'(0)(theta)
    std::array<double, 2> Fxx{};  ///< F'_xx(0)(theta)
    std::array<double, 2> Fxt{};  ///< F'_xt(0)(theta); b' = -F'_xt
    std::array<double, 2> f1{};   ///< f_1(theta)
    std::array<double, 2> v1{};   ///< v_1(theta)
};

/**
 * @brief a * b, taken as 0 whenever the weight a vanishes. Source derivatives
 * may be singular on the lateral boundary where every admissible deformation is 0.
 */
inline double weighted(double a, double b)
{
    return a == 0.0 ? 0.0 : a * b;
}

/** @brief True for the grid lines on the design boundary, where theta vanishes. */
inline bool on_design_boundary(const SpaceTimeMesh& mesh, int grid_line)
{
    return grid_line == 0 || grid_line == mesh.n_x();
}

/** @brief Splits a pullback form a theta(y) + B theta'(y) into nodal coefficients. */
inline std::array<double, 2> nodal_split(const PullbackLinearForm<1>& f, double y, double xl,
                                         double xr)
{
    const double h = xr - xl;
    const double nl = (xr - y) / h;
    const double nr = (y - xl) / h;
    return {weighted(nl, f.a(0)) - f.B(0, 0) / h, weighted(nr, f.a(0)) + f.B(0, 0) / h};
}

/**
 * @brief Perturbation coefficients for the continuous deformation field
 * (kernels evaluated at y = phi_t^{-1}(x) through the pullback forms).
 */
inline PointPerturbation pullback_perturbation(const SpaceTimeMesh& mesh, int column,
                                               const QuadPoint& q, double f_x)
{
    const KernelPoint<1> kp(mesh.motion(), q.t, vec1(q.x));
    const double xl = mesh.xi()[column];
    const double xr = mesh.xi()[column + 1];
    const double y = kp.y(0);
    PointPerturbation p;
    p.m = nodal_split(m_prime(kp), y, xl, xr);
    p.Fxx = nodal_split(Fxx_prime(kp)[0][0], y, xl, xr);
    p.Fxt = nodal_split(Fxt_prime(kp)[0], y, xl, xr);
    p.f1 = nodal_split(pullback_scalar_derivative(vec1(f_x), kp), y, xl, xr);
    Mat<1> jv;
    jv(0, 0) = q.vx;
    p.v1 = nodal_split(pullback_vector_derivative(jv, kp)[0], y, xl, xr);
    for (int s = 0; s < 2; ++s) {
        if (on_design_boundary(mesh, column + s)) {
            p.m[s] = p.Fxx[s] = p.Fxt[s] = p.f1[s] = p.v1[s] = 0.0;
        }
    }
    return p;
}

/**
 * @brief Vertex displacement rates W_v = dphi_t/dxi(xi_v) for the vertices of
 * an element, split into (left, right) column node contributions.
 */
struct VertexRates {
    std::array<std::array<double, 2>, 3> w{};
};

inline VertexRates vertex_rates(const SpaceTimeMesh& mesh, const ElementGeometry& g, int column)
{
    VertexRates r;
    for (int j = 0; j < 3; ++j) {
        const int v = g.vertex[j];
        const int side = mesh.grid_i(v) == column ? 0 : 1;
        if (on_design_boundary(mesh, mesh.grid_i(v))) {
            continue;
        }
        const Eigen::Vector2d ref = mesh.reference_coord(v);
        r.w[j][side] = mesh.motion().grad(ref(0), vec1(ref(1)))(0, 0);
    }
    return r;
}

/**
 * @brief Perturbation coefficients for the P1 interpolant of the deformation
 * field, which is exactly how the discrete mesh moves.
 */
inline PointPerturbation interpolant_perturbation(const ElementGeometry& g, const VertexRates& r,
                                                  const QuadPoint& q, double f_x)
{
    PointPerturbation p;
    for (int s = 0; s < 2; ++s) {
        double W = 0.0, Wx = 0.0, Wt = 0.0;
        for (int j = 0; j < 3; ++j) {
            W += q.lambda[j] * r.w[j][s];
            Wx += g.dx[j] * r.w[j][s];
            Wt += g.dt[j] * r.w[j][s];
        }
        p.m[s] = Wx;
        p.Fxx[s] = Wx;
        p.Fxt[s] = Wt;
        p.f1[s] = weighted(W, f_x);
        p.v1[s] = q.vx * W;
    }
    return p;
}

}  // namespace stshapeopt::detail
