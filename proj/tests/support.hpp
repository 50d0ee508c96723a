/**
 * @brief Shared helpers for the test suites: small vector constructors and the
 * hand-written moving-interface example problem.
 */
#pragma once

#include <cmath>
#include <vector>

#include "stshapeopt/optimizer.hpp"

namespace testing_support {

using namespace stshapeopt;

inline Vec<1> v1(double x)
{
    Vec<1> v;
    v(0) = x;
    return v;
}

inline Mat<1> m1(double x)
{
    Mat<1> m;
    m(0, 0) = x;
    return m;
}

inline Vec<2> v2(double a, double b) { return Vec<2>(a, b); }

/** @brief Materials of the example: phase 1 conducting (sigma 10, nu 1), phase 2 (sigma 0, nu 10). */
inline MaterialLaw example_materials(double sigma1 = 10.0, double sigma2 = 0.0)
{
    MaterialLaw m;
    m.set_phase(1, sigma1, ReluctivityLaw::constant(1.0));
    m.set_phase(2, sigma2, ReluctivityLaw::constant(10.0));
    return m;
}

/**
 * @brief f(t, x) = (xi - 0.4)(xi - 0.6) sqrt(x) (1 + t - x) with xi the reference
 * point of x under source_motion, written out by hand with its x-derivative.
 */
inline Source example_source(const Motion1& source_motion)
{
    Source f;
    f.value = [source_motion](double t, double x, int) {
        const double xi = source_motion.inverse(t, v1(x))(0);
        return (xi - 0.4) * (xi - 0.6) * std::sqrt(x) * (1.0 + t - x);
    };
    f.dx = [source_motion](double t, double x, int) {
        const double xi = source_motion.inverse(t, v1(x))(0);
        const double dxi = 1.0 / source_motion.grad(t, v1(xi))(0, 0);
        const double s = std::sqrt(x);
        return (2.0 * xi - 1.0) * dxi * s * (1.0 + t - x) +
               (xi - 0.4) * (xi - 0.6) * ((1.0 + t - x) / (2.0 * s) - s);
    };
    return f;
}

/** @brief Example problem on an n x n mesh with the given motion and materials. */
inline ShapeProblem example_problem(int n, const Motion1& motion, const MaterialLaw& materials,
                                    const Motion1& source_motion = Motion1::polynomial())
{
    SpaceTimeMesh mesh = generate_1d_example_mesh(n, n, {0.4, 0.6}, motion);
    restrict_periodicity_to_conductors(mesh, materials);
    return ShapeProblem{mesh, materials, example_source(source_motion), Objective::integral(), {}, {}};
}

/** @brief Smooth test deformation sin(pi xi)(1 + xi), vanishing at both ends. */
inline Eigen::VectorXd smooth_theta(const SpaceTimeMesh& mesh)
{
    const int n = mesh.n_x();
    Eigen::VectorXd theta(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double x = mesh.xi()[i];
        theta(i) = std::sin(M_PI * x) * (1.0 + x);
    }
    return theta;
}

/** @brief Least-squares slope of log(y) against log(x). */
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]);
        const double b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing_support
