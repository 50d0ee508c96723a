/**
 * @brief Derivative kernels of the space-time change of variables.
 *
 * For a spatial deformation Id + theta of the reference domain, the space-time
 * map Theta(t,x) = (t, phi_t((Id+theta)(phi_t^{-1} x))) induces Jacobian
 * blocks F_xx, F_xt, the determinant m and the pulled back coefficients.
 * Their derivatives at theta = 0 are linear in (theta(y), grad theta(y)) with
 * y = phi_t^{-1}(x); each one is returned as a PullbackLinearForm.
 */
#pragma once

#include <array>
#include <functional>

#include "stshapeopt/motion.hpp"

namespace stshapeopt {

/** @brief value(theta) = a . theta(y) + B : grad theta(y). */
template <int Dim>
struct PullbackLinearForm {
    Vec<Dim> a = Vec<Dim>::Zero();
    Mat<Dim> B = Mat<Dim>::Zero();

    double value(const Vec<Dim>& theta_y, const Mat<Dim>& grad_theta_y) const
    {
        return a.dot(theta_y) + (B.array() * grad_theta_y.array()).sum();
    }

    PullbackLinearForm& operator+=(const PullbackLinearForm& o)
    {
        a += o.a;
        B += o.B;
        return *this;
    }
    PullbackLinearForm& operator-=(const PullbackLinearForm& o)
    {
        a -= o.a;
        B -= o.B;
        return *this;
    }
    PullbackLinearForm& operator*=(double s)
    {
        a *= s;
        B *= s;
        return *this;
    }
    friend PullbackLinearForm operator+(PullbackLinearForm l, const PullbackLinearForm& r) { return l += r; }
    friend PullbackLinearForm operator-(PullbackLinearForm l, const PullbackLinearForm& r) { return l -= r; }
    friend PullbackLinearForm operator*(double s, PullbackLinearForm f) { return f *= s; }
    friend PullbackLinearForm operator-(PullbackLinearForm f) { return f *= -1.0; }
};

template <int Dim>
using FormVector = std::array<PullbackLinearForm<Dim>, Dim>;
template <int Dim>
using FormMatrix = std::array<std::array<PullbackLinearForm<Dim>, Dim>, Dim>;

template <int Dim>
Vec<Dim> evaluate(const FormVector<Dim>& f, const Vec<Dim>& theta_y, const Mat<Dim>& grad_theta_y)
{
    Vec<Dim> r;
    for (int i = 0; i < Dim; ++i) {
        r(i) = f[i].value(theta_y, grad_theta_y);
    }
    return r;
}

template <int Dim>
Mat<Dim> evaluate(const FormMatrix<Dim>& f, const Vec<Dim>& theta_y, const Mat<Dim>& grad_theta_y)
{
    Mat<Dim> r;
    for (int i = 0; i < Dim; ++i) {
        for (int j = 0; j < Dim; ++j) {
            r(i, j) = f[i][j].value(theta_y, grad_theta_y);
        }
    }
    return r;
}

/** @brief Contraction sum_ij c(i,j) F[i][j] of a form-valued matrix with a fixed matrix. */
template <int Dim>
PullbackLinearForm<Dim> contract(const FormMatrix<Dim>& f, const Mat<Dim>& c)
{
    PullbackLinearForm<Dim> r;
    for (int i = 0; i < Dim; ++i) {
        for (int j = 0; j < Dim; ++j) {
            r += c(i, j) * f[i][j];
        }
    }
    return r;
}

/** @brief Contraction sum_i c(i) F[i] of a form-valued vector with a fixed vector. */
template <int Dim>
PullbackLinearForm<Dim> contract(const FormVector<Dim>& f, const Vec<Dim>& c)
{
    PullbackLinearForm<Dim> r;
    for (int i = 0; i < Dim; ++i) {
        r += c(i) * f[i];
    }
    return r;
}

/** @brief Motion data at one physical space-time point, shared by all kernels. */
template <int Dim>
struct KernelPoint {
    double t = 0.0;
    Vec<Dim> x;     ///< physical point
    Vec<Dim> y;     ///< reference point phi_t^{-1}(x)
    Mat<Dim> G;     ///< grad phi_t(y)
    Mat<Dim> Ginv;  ///< grad phi_t^{-1}(x) = G^{-1}
    Hess<Dim> H;    ///< grad^2 phi_t(y)
    Mat<Dim> Gt;    ///< grad (dphi/dt)(y)
    Vec<Dim> s;     ///< d/dt phi_t^{-1}(x)

    KernelPoint(const MotionMap<Dim>& motion, double t_, const Vec<Dim>& x_) : t(t_), x(x_)
    {
        y = motion.inverse(t, x);
        G = motion.grad(t, y);
        Ginv = G.inverse();
        H = motion.grad2(t, y);
        Gt = motion.grad_dt(t, y);
        s = -Ginv * motion.dt(t, y);
    }
};

/** @brief m'(0)(theta) = tr([grad^2 phi theta][grad phi^{-1}]) + div theta. */
template <int Dim>
PullbackLinearForm<Dim> m_prime(const KernelPoint<Dim>& kp)
{
    PullbackLinearForm<Dim> f;
    for (int k = 0; k < Dim; ++k) {
        double ak = 0.0;
        for (int i = 0; i < Dim; ++i) {
            for (int j = 0; j < Dim; ++j) {
                ak += kp.H[i](j, k) * kp.Ginv(j, i);
            }
        }
        f.a(k) = ak;
    }
    f.B = Mat<Dim>::Identity();
    return f;
}

/** @brief F'_xx(0)(theta) = [grad^2 phi theta][grad phi^{-1}] + [grad phi][grad theta][grad phi^{-1}]. */
template <int Dim>
FormMatrix<Dim> Fxx_prime(const KernelPoint<Dim>& kp)
{
    FormMatrix<Dim> f;
    for (int i = 0; i < Dim; ++i) {
        for (int l = 0; l < Dim; ++l) {
            auto& e = f[i][l];
            for (int k = 0; k < Dim; ++k) {
                double ak = 0.0;
                for (int j = 0; j < Dim; ++j) {
                    ak += kp.H[i](j, k) * kp.Ginv(j, l);
                }
                e.a(k) = ak;
            }
            for (int j = 0; j < Dim; ++j) {
                for (int m = 0; m < Dim; ++m) {
                    e.B(j, m) = kp.G(i, j) * kp.Ginv(m, l);
                }
            }
        }
    }
    return f;
}

/**
 * @brief F'_xt(0)(theta) = [grad dphi/dt] theta + [grad^2 phi theta] s + [grad phi][grad theta] s,
 * with s the time derivative of t -> phi_t^{-1}(x).
 */
template <int Dim>
FormVector<Dim> Fxt_prime(const KernelPoint<Dim>& kp)
{
    FormVector<Dim> f;
    for (int i = 0; i < Dim; ++i) {
        auto& e = f[i];
        for (int k = 0; k < Dim; ++k) {
            double ak = kp.Gt(i, k);
            for (int j = 0; j < Dim; ++j) {
                ak += kp.H[i](j, k) * kp.s(j);
            }
            e.a(k) = ak;
        }
        for (int j = 0; j < Dim; ++j) {
            for (int m = 0; m < Dim; ++m) {
                e.B(j, m) = kp.G(i, j) * kp.s(m);
            }
        }
    }
    return f;
}

/** @brief b'(0)(theta) = -F'_xt(0)(theta). */
template <int Dim>
FormVector<Dim> b_prime(const KernelPoint<Dim>& kp)
{
    FormVector<Dim> f = Fxt_prime(kp);
    for (auto& e : f) {
        e *= -1.0;
    }
    return f;
}

/** @brief A'(0)(theta) = m'(0)(theta) I - F'_xx(0)(theta) - F'_xx(0)(theta)^T. */
template <int Dim>
FormMatrix<Dim> A_prime(const KernelPoint<Dim>& kp)
{
    const PullbackLinearForm<Dim> m = m_prime(kp);
    const FormMatrix<Dim> F = Fxx_prime(kp);
    FormMatrix<Dim> f;
    for (int i = 0; i < Dim; ++i) {
        for (int j = 0; j < Dim; ++j) {
            f[i][j] = -1.0 * (F[i][j] + F[j][i]);
            if (i == j) {
                f[i][j] += m;
            }
        }
    }
    return f;
}

/** @brief f_1(theta) = ([grad phi]^T grad f(t,x)) . theta(y), from the gradient value at (t,x). */
template <int Dim>
PullbackLinearForm<Dim> pullback_scalar_derivative(const Vec<Dim>& grad_f, const KernelPoint<Dim>& kp)
{
    PullbackLinearForm<Dim> f;
    f.a = kp.G.transpose() * grad_f;
    return f;
}

/** @brief w_1(theta) = [grad w(t,x)][grad phi] theta(y), from the Jacobian value at (t,x). */
template <int Dim>
FormVector<Dim> pullback_vector_derivative(const Mat<Dim>& jac_w, const KernelPoint<Dim>& kp)
{
    const Mat<Dim> c = jac_w * kp.G;
    FormVector<Dim> f;
    for (int i = 0; i < Dim; ++i) {
        f[i].a = c.row(i).transpose();
    }
    return f;
}

/** @brief Smooth space-time scalar field with spatial gradient. */
template <int Dim>
struct SmoothScalarField {
    std::function<double(double, const Vec<Dim>&)> value;
    std::function<Vec<Dim>(double, const Vec<Dim>&)> grad;
};

/** @brief Smooth space-time vector field with spatial Jacobian. */
template <int Dim>
struct SmoothVectorField {
    std::function<Vec<Dim>(double, const Vec<Dim>&)> value;
    std::function<Mat<Dim>(double, const Vec<Dim>&)> jacobian;
};

// Convenience overloads taking the motion and a physical point directly.

template <int Dim>
PullbackLinearForm<Dim> m_prime(const MotionMap<Dim>& motion, double t, const Vec<Dim>& x)
{
    return m_prime(KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
FormMatrix<Dim> Fxx_prime(const MotionMap<Dim>& motion, double t, const Vec<Dim>& x)
{
    return Fxx_prime(KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
FormVector<Dim> Fxt_prime(const MotionMap<Dim>& motion, double t, const Vec<Dim>& x)
{
    return Fxt_prime(KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
FormVector<Dim> b_prime(const MotionMap<Dim>& motion, double t, const Vec<Dim>& x)
{
    return b_prime(KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
FormMatrix<Dim> A_prime(const MotionMap<Dim>& motion, double t, const Vec<Dim>& x)
{
    return A_prime(KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
PullbackLinearForm<Dim> pullback_scalar_derivative(const SmoothScalarField<Dim>& f,
                                                    const MotionMap<Dim>& motion, double t,
                                                    const Vec<Dim>& x)
{
    return pullback_scalar_derivative(f.grad(t, x), KernelPoint<Dim>(motion, t, x));
}

template <int Dim>
FormVector<Dim> pullback_vector_derivative(const SmoothVectorField<Dim>& w,
                                           const MotionMap<Dim>& motion, double t,
                                           const Vec<Dim>& x)
{
    return pullback_vector_derivative(w.jacobian(t, x), KernelPoint<Dim>(motion, t, x));
}

/** @brief Closed forms of the kernels for the rigid rotation, evaluated for a given theta. */
namespace rotation {

/** @brief F'_xx(0)(theta) = R_alpha [grad theta(y)] R_{-alpha}. */
inline Mat<2> Fxx_prime_value(const Motion2& motion, double t, const Mat<2>& grad_theta_y)
{
    const double a = motion.angle(t);
    return Motion2::rotation_matrix(a) * grad_theta_y * Motion2::rotation_matrix(-a);
}

/** @brief F'_xt(0)(theta) = (dR_alpha/dt) theta(y) + R_alpha [grad theta(y)] (dR_{-alpha}/dt) x. */
inline Vec<2> Fxt_prime_value(const Motion2& motion, double t, const Vec<2>& x,
                              const Vec<2>& theta_y, const Mat<2>& grad_theta_y)
{
    const double a = motion.angle(t);
    return motion.rotation_rate(t) * theta_y +
           Motion2::rotation_matrix(a) * grad_theta_y * (motion.inverse_rotation_rate(t) * x);
}

/** @brief m'(0)(theta) = div theta(y). */
inline double m_prime_value(const Mat<2>& grad_theta_y) { return grad_theta_y.trace(); }

/** @brief w_1(theta) = [grad w] R_alpha theta(y). */
inline Vec<2> w1_value(const Motion2& motion, double t, const Mat<2>& jac_w, const Vec<2>& theta_y)
{
    return jac_w * Motion2::rotation_matrix(motion.angle(t)) * theta_y;
}

}  // namespace rotation

}  // namespace stshapeopt
