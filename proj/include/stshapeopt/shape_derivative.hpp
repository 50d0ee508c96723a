/**
 * @brief Shape derivatives of the academic functional and of the PDE-constrained
 * functional J = int_Q j(u), and their reduction to spatial densities g0, g1.
 *
 * A spatial deformation theta is P1 on the reference grid of the current mesh
 * and vanishes on the design boundary. The space-time vertex (t_k, phi(xi_i))
 * moves with rate W = dphi_t/dxi(xi_i) theta(xi_i).
 *
 * Two representations of the space-time deformation field are offered:
 *  - MeshInterpolant: the P1 interpolant of W on the space-time mesh. This is
 *    how the discrete mesh actually moves, so the resulting derivative is the
 *    exact derivative of the discrete objective.
 *  - Pullback: the continuous field, with every kernel evaluated through the
 *    pullback forms at y = phi_t^{-1}(x). It converges to the same value
 *    under refinement.
 */
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stshapeopt/fem.hpp"
#include "stshapeopt/motion_kernel.hpp"

namespace stshapeopt {

enum class DeformationModel { MeshInterpolant, Pullback };

/**
 * @brief How the space-time volume form is reduced to P0 densities.
 *  - ElementMoments: exact moments of the quadrature, so the pairing equals
 *    the space-time volume form for every P1 theta.
 *  - CentroidTrapezoid: densities sampled at segment centroids along the
 *    trajectory t -> phi_t(xi_c), composite trapezoid in time. Pullback model only.
 */
enum class DensityQuadrature { ElementMoments, CentroidTrapezoid };

struct DerivativeOptions {
    DeformationModel model = DeformationModel::MeshInterpolant;
    DensityQuadrature quadrature = DensityQuadrature::ElementMoments;
};

/** @brief J'(Omega)(theta) = sum_e int_e g0 theta + g1 theta' for P0 g0, g1 on the spatial mesh. */
struct DerivativeDensities {
    std::vector<double> g0;
    std::vector<double> g1;
    std::string functional;
    DerivativeOptions options;

    static DerivativeDensities zero(int n_elements, std::string functional, DerivativeOptions o);
    /** @brief Builds densities from per-column nodal loads (left, right). */
    static DerivativeDensities from_nodal_loads(const SpatialMesh& mesh,
                                                const std::vector<double>& left,
                                                const std::vector<double>& right,
                                                std::string functional, DerivativeOptions o);

    /** @brief Pairing with a P1 field theta (nodal values). */
    double pair(const SpatialMesh& mesh, const Eigen::VectorXd& theta) const;
    /** @brief Nodal load G with pair(theta) = G . theta. */
    Eigen::VectorXd nodal_load(const SpatialMesh& mesh) const;

    DerivativeDensities& operator+=(const DerivativeDensities& other);
};

/** @brief Volume-form densities of J = int_Q j(u) (constant or curve reluctivities). */
DerivativeDensities pde_volume_densities(const SpaceTimeMesh& mesh, const PhaseLayout& layout,
                                         const Field& u, const Field& p, const Source& f,
                                         const Objective& obj, const DerivativeOptions& options = {});

/** @brief Volume form evaluated directly for one theta (no density reduction). */
double pde_volume_derivative(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                             const Field& p, const Source& f, const Objective& obj,
                             const Eigen::VectorXd& theta,
                             DeformationModel model = DeformationModel::MeshInterpolant);

/** @brief Lagrangian derivative of the state in direction theta (linearized state equation). */
Field solve_tangent(const SpaceTimeMesh& mesh, const PhaseLayout& layout, const Field& u,
                    const Source& f, const Eigen::VectorXd& theta,
                    DeformationModel model = DeformationModel::MeshInterpolant);

/** @brief J'(Omega)(theta) = int m' j(u) + int j'(u) u_dot, from a tangent solution. */
double tangent_derivative(const SpaceTimeMesh& mesh, const Field& u, const Field& u_dot,
                          const Objective& obj, const Eigen::VectorXd& theta,
                          DeformationModel model = DeformationModel::MeshInterpolant);

/** @brief Interface density of the linear surface form at one interface grid line. */
struct InterfaceDensity {
    int node = 0;        ///< grid index of the interface line
    double xi = 0.0;     ///< reference position
    double normal = 0.0; ///< outward normal of the design phase (+1 or -1)
    double v = 0.0;      ///< v_Omega(xi)
};

/**
 * @brief Surface form of the linear shape derivative at every interface point
 * bounding design_phase. Throws UnsupportedCaseError for nonlinear laws.
 */
std::vector<InterfaceDensity> pde_surface_derivative(const SpaceTimeMesh& mesh,
                                                     const PhaseLayout& layout, const Field& u,
                                                     const Field& p, int design_phase = 1);

/** @brief sum over interface points of v theta(xi) n. */
double pair_surface(const std::vector<InterfaceDensity>& dens, const Eigen::VectorXd& theta);

// Academic functional J(Omega) = int_{Q_Omega} f.

/** @brief Space-time quadrature point for the generic academic volume form. */
template <int Dim>
struct SpaceTimeQuadPoint {
    double t = 0.0;
    Vec<Dim> x;
    double weight = 0.0;
};

/** @brief theta and its gradient at a reference point. */
template <int Dim>
struct ThetaValue {
    Vec<Dim> value;
    Mat<Dim> grad;
};

/**
 * @brief Volume form int m'(theta) f + f_1(theta) over the supplied quadrature
 * points covering Q_Omega (any dimension, pullback kernels).
 */
template <int Dim>
double academic_volume_derivative(const SmoothScalarField<Dim>& f, const MotionMap<Dim>& motion,
                                  std::span<const SpaceTimeQuadPoint<Dim>> points,
                                  const std::function<ThetaValue<Dim>(const Vec<Dim>&)>& theta)
{
    double sum = 0.0;
    for (const auto& q : points) {
        const KernelPoint<Dim> kp(motion, q.t, q.x);
        const ThetaValue<Dim> th = theta(kp.y);
        const double m = m_prime(kp).value(th.value, th.grad);
        const double f1 = pullback_scalar_derivative(f.grad(q.t, q.x), kp).value(th.value, th.grad);
        sum += q.weight * (m * f.value(q.t, q.x) + f1);
    }
    return sum;
}

/** @brief J(Omega) = int over elements of the given phases of f, on the mesh. */
double academic_objective(const SmoothScalarField<1>& f, const SpaceTimeMesh& mesh,
                          const std::vector<int>& phases);

/** @brief Volume form of the academic derivative on the mesh for a P1 theta. */
double academic_volume_derivative(const SmoothScalarField<1>& f, const SpaceTimeMesh& mesh,
                                  const std::vector<int>& phases, const Eigen::VectorXd& theta,
                                  DeformationModel model = DeformationModel::Pullback);

/** @brief Boundary point of Omega with outward normal and theta value. */
struct InterfacePoint {
    double xi = 0.0;
    double normal = 0.0;
    double theta = 0.0;
};

/**
 * @brief Surface form sum_p v(xi_p) theta_p n_p with
 * v(xi) = int_0^T |det grad phi_t(xi)| f(t, phi_t(xi)) dt (composite trapezoid, n_steps intervals).
 */
double academic_surface_derivative(const SmoothScalarField<1>& f,
                                   const std::vector<InterfacePoint>& points, const Motion1& motion,
                                   double T, int n_steps);

/**
 * @brief Pointwise magnetization supplement -(m' L + L_1 - F'_xx L) . grad p as
 * a pullback form, for a field L with Jacobian jac_L at (t, x).
 */
template <int Dim>
PullbackLinearForm<Dim> magnetization_integrand(const KernelPoint<Dim>& kp, const Vec<Dim>& L,
                                                const Mat<Dim>& jac_L, const Vec<Dim>& grad_p)
{
    PullbackLinearForm<Dim> r = L.dot(grad_p) * m_prime(kp);
    r += contract(pullback_vector_derivative(jac_L, kp), grad_p);
    r -= contract(Fxx_prime(kp), Mat<Dim>(grad_p * L.transpose()));
    return -1.0 * r;
}

/**
 * @brief Densities of -int_{Q_mag} (m' L + L_1 - F'_xx L) . grad p over the
 * elements whose phase is in mag_phases.
 */
DerivativeDensities magnetization_supplement(const SpaceTimeMesh& mesh,
                                             const SmoothScalarField<1>& L, const Field& p,
                                             const std::vector<int>& mag_phases,
                                             const DerivativeOptions& options = {});

}  // namespace stshapeopt
