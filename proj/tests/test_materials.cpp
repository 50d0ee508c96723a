/**
 * @brief Reluctivity laws, phase tables and the Arkkio torque weight.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stshapeopt/materials.hpp"

using namespace stshapeopt;

namespace {

const double kNuAir = 1e7 / (4.0 * M_PI);

ReluctivityLaw iron() { return ReluctivityLaw::curve(kNuAir, 200.0, 0.001, 6.0); }

/** @brief Dense tensor-product Gauss-Legendre integral over an annular sector in polar coordinates. */
double polar_integral(const std::function<double(const Eigen::Vector2d&)>& g, double r0, double r1,
                      double a0, double a1, int n_r, int n_a)
{
    static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    double sum = 0.0;
    const double hr = (r1 - r0) / n_r;
    const double ha = (a1 - a0) / n_a;
    for (int i = 0; i < n_r; ++i) {
        for (int j = 0; j < n_a; ++j) {
            for (int p = 0; p < 5; ++p) {
                for (int q = 0; q < 5; ++q) {
                    const double r = r0 + hr * (i + 0.5 * (xg[p] + 1.0));
                    const double a = a0 + ha * (j + 0.5 * (xg[q] + 1.0));
                    sum += 0.25 * hr * ha * wg[p] * wg[q] * r *
                           g(Eigen::Vector2d(r * std::cos(a), r * std::sin(a)));
                }
            }
        }
    }
    return sum;
}

}  // namespace

TEST(Reluctivity, CurveAtZero)
{
    const ReluctivityValue v = reluctivity(0.0, iron());
    EXPECT_DOUBLE_EQ(v.nu, 200.0);
    EXPECT_EQ(v.dnu, 0.0);
}

TEST(Reluctivity, ConstantLaw)
{
    const ReluctivityValue v = reluctivity(3.7, ReluctivityLaw::constant(1.0));
    EXPECT_EQ(v.nu, 1.0);
    EXPECT_EQ(v.dnu, 0.0);
}

TEST(Reluctivity, DerivativeMatchesCentralDifference)
{
    const ReluctivityLaw law = iron();
    for (double s : {0.5, 2.0, 10.0, 20.0}) {
        const double h = 1e-6;
        const double fd = (law.evaluate(s + h).nu - law.evaluate(s - h).nu) / (2 * h);
        const double d = law.evaluate(s).dnu;
        EXPECT_NEAR(d, fd, 1e-6 * std::max(std::abs(d), 1e-3 * law.nu_upper())) << "s=" << s;
    }
}

TEST(Reluctivity, RejectsInvalidArguments)
{
    EXPECT_THROW(iron().evaluate(-1.0), ArgumentError);
    EXPECT_THROW(iron().evaluate(std::nan("")), ArgumentError);
    EXPECT_THROW(iron().evaluate(INFINITY), ArgumentError);
    EXPECT_THROW(ReluctivityLaw::constant(0.0), ConfigError);
    EXPECT_THROW(ReluctivityLaw::curve(1.0, 2.0, 1.0, 2.0), ConfigError);
}

TEST(Reluctivity, DnuOverSRemovableSingularity)
{
    EXPECT_EQ(iron().dnu_over_s(0.0), 0.0);
    EXPECT_EQ(iron().dnu_over_s(1e-13), 0.0);
    const double s = 3.0;
    EXPECT_NEAR(iron().dnu_over_s(s), iron().evaluate(s).dnu / s, 1e-12 * iron().evaluate(s).dnu);
}

TEST(Reluctivity, BoundsOnGrid)
{
    const ReluctivityLaw law = iron();
    for (int i = 0; i <= 10000; ++i) {
        const double s = 1e5 * i / 10000.0;
        const double nu = law.evaluate(s).nu;
        ASSERT_GE(nu, law.nu_lower() * (1 - 1e-15));
        ASSERT_LE(nu, law.nu_upper() * (1 + 1e-15));
    }
}

TEST(Reluctivity, StrongMonotonicityAndLipschitzOnPairs)
{
    const ReluctivityLaw law = iron();
    const double L = law.lipschitz_constant();
    std::mt19937 rng(2024);
    // Half the samples in the saturation knee, half over the whole range.
    std::uniform_real_distribution<double> knee(0.0, 5.0);
    std::uniform_real_distribution<double> wide(0.0, 1e5);
    const double delta = 1e-12;
    for (int k = 0; k < 10000; ++k) {
        const double s1 = k % 2 ? knee(rng) : wide(rng);
        const double s2 = k % 2 ? knee(rng) : wide(rng);
        const double g1 = law.evaluate(s1).nu * s1;
        const double g2 = law.evaluate(s2).nu * s2;
        ASSERT_GE((g1 - g2) * (s1 - s2), law.nu_lower() * (s1 - s2) * (s1 - s2) * (1 - 1e-12));
        ASSERT_LE(std::abs(g1 - g2), L * std::abs(s1 - s2) * (1 + delta) + 1e-9);
    }
}

TEST(Reluctivity, SaturationBoundIsNotALipschitzConstant)
{
    // The derivative of s nu(s) overshoots nu_a near the knee of the curve.
    const ReluctivityLaw law = iron();
    const double z = (6.0 + 1.0) / 6.0;
    const double s_peak = std::pow(z / 0.001, 1.0 / 6.0);
    const double s1 = s_peak - 1e-3, s2 = s_peak + 1e-3;
    const double slope = (law.evaluate(s2).nu * s2 - law.evaluate(s1).nu * s1) / (s2 - s1);
    EXPECT_GT(slope, law.nu_a());
    EXPECT_LE(slope, law.lipschitz_constant() * (1 + 1e-9));
    EXPECT_NEAR(law.lipschitz_constant(), kNuAir + (kNuAir - 200.0) * 6.0 * std::exp(-z), 1e-6 * kNuAir);
}

TEST(Reluctivity, DerivativeBoundFromMonotonicity)
{
    const ReluctivityLaw law = iron();
    for (int i = 0; i <= 10000; ++i) {
        const double s = 60.0 * i / 10000.0;
        const ReluctivityValue v = law.evaluate(s);
        ASSERT_GE(s * v.dnu + v.nu, law.nu_lower() - 1e-12) << "s=" << s;
    }
}

TEST(Reluctivity, LinearizedTensorIsUniformlyElliptic)
{
    const ReluctivityLaw law = iron();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> us(0.0, 10.0);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
    for (int k = 0; k < 1000; ++k) {
        const double s = us(rng);
        const double a = ua(rng);
        const double b = ua(rng);
        const Eigen::Vector2d xi(std::cos(a), std::sin(a));
        const Eigen::Vector2d G = s * Eigen::Vector2d(std::cos(b), std::sin(b));
        const double q = law.evaluate(s).nu * xi.squaredNorm() + law.dnu_over_s(s) * std::pow(G.dot(xi), 2);
        ASSERT_GE(q, law.nu_lower() * xi.squaredNorm() - 1e-12);
    }
}

TEST(MaterialLaw, PhaseTable)
{
    MaterialLaw m;
    m.set_phase(1, 10.0, ReluctivityLaw::constant(1.0));
    m.set_phase(2, 0.0, iron());
    EXPECT_TRUE(m.has_phase(2));
    EXPECT_FALSE(m.is_linear());
    EXPECT_THROW(m.phase(3), ConfigError);
    EXPECT_THROW(m.set_phase(4, -1.0, ReluctivityLaw::constant(1.0)), ConfigError);
    const PhaseLayout layout({1, 2, 2}, m);
    const PhaseLayout copy = layout;
    EXPECT_EQ(copy.material(2).sigma, 0.0);
    EXPECT_EQ(copy.material(0).sigma, 10.0);
}

TEST(Arkkio, ClosedFormValues)
{
    Eigen::Matrix2d q1;
    q1 << 0.0, -0.5, -0.5, 0.0;
    EXPECT_LE((arkkio_Q({1.0, 0.0}) - q1).norm(), 1e-15);
    Eigen::Matrix2d q2;
    q2 << 0.0, 1.0, 1.0, 0.0;
    EXPECT_LE((arkkio_Q({0.0, 2.0}) - q2).norm(), 1e-15);
    EXPECT_THROW(arkkio_Q({0.0, 0.0}), SingularityError);
}

TEST(Arkkio, SymmetryTraceFrobeniusOnRandomPoints)
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Vector2d x(u(rng), u(rng));
        const Eigen::Matrix2d q = arkkio_Q(x);
        ASSERT_EQ(q(0, 1), q(1, 0));
        ASSERT_NEAR(q.trace(), 0.0, 1e-12);
        ASSERT_NEAR(q.norm(), x.norm() / std::sqrt(2.0), 1e-12 * (1 + x.norm()));
    }
}

TEST(Arkkio, ConstantPotentialGivesZeroTorque)
{
    const TriangleMesh2D mesh = generate_annulus_mesh(0.5, 1.0, 4, 32);
    const std::vector<double> u(mesh.vertices.size(), 3.0);
    EXPECT_EQ(arkkio_torque(mesh, {0.0}, {u}, 0.6, 0.9, 1.0, 1.0, 1.0), 0.0);
}

TEST(Arkkio, LinearPotentialMatchesDenseQuadrature)
{
    // u = x1 is reproduced exactly by P1, so Q grad u . grad u = Q11 on every triangle.
    const double r0 = 0.5, r1 = 1.0;
    const TriangleMesh2D mesh = generate_annulus_mesh(r0, r1, 8, 64, 0.0, 0.5 * M_PI);
    std::vector<double> u(mesh.vertices.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = mesh.vertices[i](0);
    }
    const double L = 0.2, nu = 3.0, T = 1.0;
    const double discrete = arkkio_torque(mesh, {0.0}, {u}, r0, r1, L, nu, T);

    // Oracle: collapsed 12 x 12 Gauss-Legendre rule on each triangle of the mesh.
    constexpr int n = 12;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Golub-Welsch-free Newton iteration on the Legendre polynomial.
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        x[i] = 0.5 * (z + 1.0);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    double oracle = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector2d a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        const double jac = std::abs((b - a)(0) * (c - a)(1) - (b - a)(1) * (c - a)(0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double s = x[i];
                const double t = x[j] * (1.0 - s);
                oracle += jac * w[i] * w[j] * (1.0 - s) * arkkio_Q(a + s * (b - a) + t * (c - a))(0, 0);
            }
        }
    }
    oracle *= L * nu / (r1 - r0);
    EXPECT_NEAR(discrete, oracle, 1e-10 * std::abs(oracle));
    // Both approximate the integral over the smooth sector.
    const double smooth =
        L * nu / (r1 - r0) *
        polar_integral([](const Eigen::Vector2d& p) { return arkkio_Q(p)(0, 0); }, r0, r1, 0.0, 0.5 * M_PI, 4, 16);
    EXPECT_NEAR(discrete, smooth, 1e-3 * std::abs(smooth));
}

TEST(Arkkio, RadialPotentialTendsToZero)
{
    double previous = INFINITY;
    for (int n : {8, 16, 32}) {
        const TriangleMesh2D mesh = generate_annulus_mesh(0.5, 1.0, n / 2, 4 * n, 0.0, 0.5 * M_PI);
        std::vector<double> u(mesh.vertices.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = std::pow(mesh.vertices[i].norm(), 2);
        }
        const double tq = std::abs(arkkio_torque(mesh, {0.0, 1.0}, {u, u}, 0.5, 1.0, 1.0, 1.0, 1.0));
        EXPECT_LT(tq, previous);
        previous = tq;
    }
    EXPECT_LT(previous, 1e-3);
}

TEST(Arkkio, EmptyRingThrows)
{
    const TriangleMesh2D mesh = generate_annulus_mesh(0.5, 1.0, 4, 32);
    const std::vector<double> u(mesh.vertices.size(), 0.0);
    EXPECT_THROW(arkkio_torque(mesh, {0.0}, {u}, 2.0, 3.0, 1.0, 1.0, 1.0), GeometryError);
}
