/**
 * @brief Analytic motions phi_t of the spatial domain and their derivatives.
 *
 * A motion maps a reference point x of the design domain D to its position
 * phi_t(x) at time t. All derivatives are hand coded; the closures of the
 * Custom kind must supply them as well.
 */
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;
/** @brief Second derivative tensor: H[i](j,k) = d^2 phi_i / dx_j dx_k. */
template <int Dim>
using Hess = std::array<Mat<Dim>, Dim>;

enum class MotionKind { Identity, Rotation2D, Polynomial1D, Custom };

/** @brief User supplied motion. Every closure must be consistent with forward. */
template <int Dim>
struct CustomMotion {
    std::function<Vec<Dim>(double, const Vec<Dim>&)> forward;
    std::function<Vec<Dim>(double, const Vec<Dim>&)> inverse;
    std::function<Mat<Dim>(double, const Vec<Dim>&)> grad;
    std::function<Hess<Dim>(double, const Vec<Dim>&)> grad2;
    std::function<Vec<Dim>(double, const Vec<Dim>&)> dt;
    std::function<Mat<Dim>(double, const Vec<Dim>&)> grad_dt;
    /** @brief Optional membership test of y in phi_t(D); empty means unbounded. */
    std::function<bool(double, const Vec<Dim>&)> in_image;
};

template <int Dim>
class MotionMap {
public:
    using V = Vec<Dim>;
    using M = Mat<Dim>;
    using H = Hess<Dim>;

    static MotionMap identity() { return MotionMap(MotionKind::Identity); }

    /** @brief Rigid rotation about the origin with angle 2 pi t / period. */
    static MotionMap rotation(double period)
    {
        static_assert(Dim == 2, "Rotation2D requires a two-dimensional motion");
        if (!(period > 0.0) || !std::isfinite(period)) {
            throw ArgumentError("rotation period must be positive and finite");
        }
        MotionMap m(MotionKind::Rotation2D);
        m.period_ = period;
        return m;
    }

    /** @brief phi_t(x) = x + t x^2 on the reference interval [lo, hi]. */
    static MotionMap polynomial(double lo = 0.0, double hi = 1.0)
    {
        static_assert(Dim == 1, "Polynomial1D requires a one-dimensional motion");
        MotionMap m(MotionKind::Polynomial1D);
        m.lo_ = lo;
        m.hi_ = hi;
        return m;
    }

    static MotionMap custom(CustomMotion<Dim> closures)
    {
        if (!closures.forward || !closures.inverse || !closures.grad || !closures.grad2 ||
            !closures.dt || !closures.grad_dt) {
            throw ArgumentError("custom motion requires forward, inverse, grad, grad2, dt and grad_dt");
        }
        MotionMap m(MotionKind::Custom);
        m.custom_ = std::make_shared<const CustomMotion<Dim>>(std::move(closures));
        return m;
    }

    MotionKind kind() const { return kind_; }
    double period() const { return period_; }

    /** @brief Rotation angle alpha(t) and its time derivative. */
    double angle(double t) const { return 2.0 * M_PI * t / period_; }
    double angle_rate() const { return 2.0 * M_PI / period_; }

    V forward(double t, const V& x) const
    {
        switch (kind_) {
        case MotionKind::Identity:
            return x;
        case MotionKind::Rotation2D:
            return rotation_matrix(angle(t)) * x;
        case MotionKind::Polynomial1D: {
            V y;
            y(0) = x(0) + t * x(0) * x(0);
            return y;
        }
        case MotionKind::Custom:
            return custom_->forward(t, x);
        }
        return x;
    }

    /** @brief phi_t^{-1}(y); throws DomainError when y is outside phi_t(D). */
    V inverse(double t, const V& y) const
    {
        switch (kind_) {
        case MotionKind::Identity:
            return y;
        case MotionKind::Rotation2D:
            return rotation_matrix(-angle(t)) * y;
        case MotionKind::Polynomial1D:
            return polynomial_inverse(t, y);
        case MotionKind::Custom:
            if (custom_->in_image && !custom_->in_image(t, y)) {
                throw DomainError("point outside the image of the custom motion");
            }
            return custom_->inverse(t, y);
        }
        return y;
    }

    M grad(double t, const V& x) const
    {
        switch (kind_) {
        case MotionKind::Identity:
            return M::Identity();
        case MotionKind::Rotation2D:
            return rotation_matrix(angle(t));
        case MotionKind::Polynomial1D: {
            M g;
            g(0, 0) = 1.0 + 2.0 * t * x(0);
            return g;
        }
        case MotionKind::Custom:
            return custom_->grad(t, x);
        }
        return M::Identity();
    }

    H grad2(double t, const V& x) const
    {
        H h;
        for (auto& m : h) {
            m.setZero();
        }
        if (kind_ == MotionKind::Polynomial1D) {
            h[0](0, 0) = 2.0 * t;
        } else if (kind_ == MotionKind::Custom) {
            h = custom_->grad2(t, x);
        }
        return h;
    }

    /** @brief Partial time derivative of phi_t at the reference point x. */
    V dt(double t, const V& x) const
    {
        switch (kind_) {
        case MotionKind::Identity:
            return V::Zero();
        case MotionKind::Rotation2D:
            return rotation_rate(t) * x;
        case MotionKind::Polynomial1D: {
            V d;
            d(0) = x(0) * x(0);
            return d;
        }
        case MotionKind::Custom:
            return custom_->dt(t, x);
        }
        return V::Zero();
    }

    /** @brief Spatial gradient of dphi/dt at the reference point x. */
    M grad_dt(double t, const V& x) const
    {
        switch (kind_) {
        case MotionKind::Identity:
            return M::Zero();
        case MotionKind::Rotation2D:
            return rotation_rate(t);
        case MotionKind::Polynomial1D: {
            M g;
            g(0, 0) = 2.0 * x(0);
            return g;
        }
        case MotionKind::Custom:
            return custom_->grad_dt(t, x);
        }
        return M::Zero();
    }

    double det(double t, const V& x) const { return grad(t, x).determinant(); }

    /** @brief Eulerian velocity v(t,y) = dphi/dt(t, phi_t^{-1}(y)). */
    V velocity(double t, const V& y) const { return dt(t, inverse(t, y)); }

    /** @brief Spatial Jacobian of the velocity at the physical point y. */
    M velocity_grad(double t, const V& y) const
    {
        const V x = inverse(t, y);
        return grad_dt(t, x) * grad(t, x).inverse();
    }

    /** @brief Time derivative of t -> phi_t^{-1}(y) at fixed physical y. */
    V inverse_dt(double t, const V& y) const
    {
        const V x = inverse(t, y);
        return -grad(t, x).inverse() * dt(t, x);
    }

    /** @brief Rotation matrix R_a (public for the closed-form rotation kernels). */
    static M rotation_matrix(double a)
    {
        M r = M::Identity();
        if constexpr (Dim == 2) {
            r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        }
        return r;
    }

    /** @brief dR_{alpha(t)}/dt. */
    M rotation_rate(double t) const
    {
        M r = M::Zero();
        if constexpr (Dim == 2) {
            const double a = angle(t);
            const double s = std::sin(a);
            const double c = std::cos(a);
            r << -s, -c, c, -s;
            r *= angle_rate();
        }
        return r;
    }

    /** @brief dR_{-alpha(t)}/dt. */
    M inverse_rotation_rate(double t) const
    {
        M r = M::Zero();
        if constexpr (Dim == 2) {
            const double a = angle(t);
            const double s = std::sin(a);
            const double c = std::cos(a);
            r << -s, c, -c, -s;
            r *= angle_rate();
        }
        return r;
    }

private:
    explicit MotionMap(MotionKind kind) : kind_(kind) {}

    V polynomial_inverse(double t, const V& y) const
    {
        constexpr double tol = 1e-14;
        constexpr int max_iter = 50;
        constexpr double domain_slack = 1e-9;
        if (!std::isfinite(y(0)) || !std::isfinite(t)) {
            throw DomainError("non-finite point passed to the polynomial motion inverse");
        }
        const double lo = lo_ + t * lo_ * lo_;
        const double hi = hi_ + t * hi_ * hi_;
        const double scale = std::max(1.0, std::abs(hi - lo));
        if (y(0) < lo - domain_slack * scale || y(0) > hi + domain_slack * scale) {
            throw DomainError("point " + std::to_string(y(0)) + " outside phi_t(D) at t=" +
                              std::to_string(t));
        }
        // Newton from x = y: g(x) = x + t x^2 - y is increasing and convex on
        // the reference interval, so the iterates decrease monotonically.
        double x = y(0);
        for (int it = 0; it < max_iter; ++it) {
            const double g = x + t * x * x - y(0);
            const double dx = g / (1.0 + 2.0 * t * x);
            x -= dx;
            if (std::abs(dx) <= tol * std::max(1.0, std::abs(x))) {
                V r;
                r(0) = x;
                return r;
            }
        }
        throw DomainError("polynomial motion inverse did not converge");
    }

    MotionKind kind_;
    double period_ = 1.0;
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::shared_ptr<const CustomMotion<Dim>> custom_;
};

using Motion1 = MotionMap<1>;
using Motion2 = MotionMap<2>;

/**
 * @brief Time-periodic motion phi_t(x) = x + s(t) x (1 - x) of [0,1] onto itself,
 * s(t) = a sin(2 pi t / period). Requires |a| < 1 so that phi_t stays monotone.
 */
inline Motion1 oscillating_motion(double amplitude, double period = 1.0)
{
    if (!(std::abs(amplitude) < 1.0) || !(period > 0.0) || !std::isfinite(period)) {
        throw ArgumentError("oscillating motion needs |amplitude| < 1 and a positive period");
    }
    const double w = 2.0 * M_PI / period;
    auto s = [=](double t) { return amplitude * std::sin(w * t); };
    auto ds = [=](double t) { return amplitude * w * std::cos(w * t); };
    auto scalar = [](double v) {
        Vec<1> r;
        r(0) = v;
        return r;
    };
    auto matrix = [](double v) {
        Mat<1> r;
        r(0, 0) = v;
        return r;
    };
    CustomMotion<1> c;
    c.forward = [=](double t, const Vec<1>& x) { return scalar(x(0) + s(t) * x(0) * (1.0 - x(0))); };
    c.inverse = [=](double t, const Vec<1>& y) {
        const double st = s(t);
        if (std::abs(st) < 1e-14) {
            return scalar(y(0));
        }
        // Root of st x^2 - (1 + st) x + y = 0 lying in [0, 1], in the cancellation-free form.
        const double b = 1.0 + st;
        return scalar(2.0 * y(0) / (b + std::sqrt(b * b - 4.0 * st * y(0))));
    };
    c.grad = [=](double t, const Vec<1>& x) { return matrix(1.0 + s(t) * (1.0 - 2.0 * x(0))); };
    c.grad2 = [=](double t, const Vec<1>&) {
        Hess<1> h;
        h[0] = matrix(-2.0 * s(t));
        return h;
    };
    c.dt = [=](double t, const Vec<1>& x) { return scalar(ds(t) * x(0) * (1.0 - x(0))); };
    c.grad_dt = [=](double t, const Vec<1>& x) { return matrix(ds(t) * (1.0 - 2.0 * x(0))); };
    c.in_image = [](double, const Vec<1>& y) { return y(0) >= -1e-9 && y(0) <= 1.0 + 1e-9; };
    return Motion1::custom(std::move(c));
}

}  // namespace stshapeopt
