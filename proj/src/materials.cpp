#include "stshapeopt/materials.hpp"

#include <cmath>
#include <string>

#include "stshapeopt/quadrature.hpp"

namespace stshapeopt {

ReluctivityLaw ReluctivityLaw::constant(double value)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError("constant reluctivity must be positive and finite");
    }
    ReluctivityLaw law;
    law.kind_ = Kind::Constant;
    law.value_ = value;
    return law;
}

ReluctivityLaw ReluctivityLaw::curve(double nu_a, double c1, double c2, double c3)
{
    if (!(c1 > 0.0) || !(nu_a >= c1) || !(c2 > 0.0) || !(c3 >= 1.0) || !std::isfinite(nu_a) ||
        !std::isfinite(c2) || !std::isfinite(c3)) {
        throw ConfigError("reluctivity curve requires nu_a >= c1 > 0, c2 > 0, c3 >= 1");
    }
    ReluctivityLaw law;
    law.kind_ = Kind::Curve;
    law.nu_a_ = nu_a;
    law.c1_ = c1;
    law.c2_ = c2;
    law.c3_ = c3;
    return law;
}

ReluctivityValue ReluctivityLaw::evaluate(double s) const
{
    if (!(s >= 0.0) || !std::isfinite(s)) {
        throw ArgumentError("reluctivity argument must be finite and non-negative, got " +
                            std::to_string(s));
    }
    if (kind_ == Kind::Constant) {
        return {value_, 0.0};
    }
    const double e = std::exp(-c2_ * std::pow(s, c3_));
    ReluctivityValue r;
    r.nu = nu_a_ - (nu_a_ - c1_) * e;
    r.dnu = (nu_a_ - c1_) * e * c2_ * c3_ * std::pow(s, c3_ - 1.0);
    return r;
}

double ReluctivityLaw::dnu_over_s(double s) const
{
    constexpr double s_guard = 1e-12;
    if (kind_ == Kind::Constant || s < s_guard) {
        return 0.0;
    }
    return evaluate(s).dnu / s;
}

double ReluctivityLaw::nu_lower() const { return kind_ == Kind::Constant ? value_ : c1_; }

double ReluctivityLaw::nu_upper() const { return kind_ == Kind::Constant ? value_ : nu_a_; }

double ReluctivityLaw::lipschitz_constant() const
{
    if (kind_ == Kind::Constant) {
        return value_;
    }
    // d/ds (nu(s) s) = nu_a - (nu_a - c1) e^{-z} (1 - c3 z) with z = c2 s^c3;
    // the maximum over z >= 0 is attained at z = (c3 + 1) / c3.
    return nu_a_ + (nu_a_ - c1_) * c3_ * std::exp(-(1.0 + 1.0 / c3_));
}

void MaterialLaw::set_phase(int id, double sigma, const ReluctivityLaw& nu)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("conductivity of phase " + std::to_string(id) +
                          " must be finite and non-negative");
    }
    phases_[id] = PhaseMaterial{sigma, nu};
}

const PhaseMaterial& MaterialLaw::phase(int id) const
{
    const auto it = phases_.find(id);
    if (it == phases_.end()) {
        throw ConfigError("phase " + std::to_string(id) + " has no material");
    }
    return it->second;
}

bool MaterialLaw::is_linear() const
{
    for (const auto& [id, m] : phases_) {
        if (!m.nu.is_constant()) {
            return false;
        }
    }
    return true;
}

PhaseLayout::PhaseLayout(std::vector<int> element_phase, MaterialLaw materials)
    : element_phase_(std::move(element_phase)), materials_(std::make_shared<const MaterialLaw>(std::move(materials)))
{
    element_material_.reserve(element_phase_.size());
    for (const int id : element_phase_) {
        element_material_.push_back(&materials_->phase(id));
    }
}

Eigen::Matrix2d arkkio_Q(const Eigen::Vector2d& x)
{
    const double r = x.norm();
    if (!(r > 0.0)) {
        throw SingularityError("Arkkio weight is singular at the origin");
    }
    const double off = 0.5 * (x(1) * x(1) - x(0) * x(0));
    Eigen::Matrix2d q;
    q << x(0) * x(1), off, off, -x(0) * x(1);
    return q / r;
}

TriangleMesh2D generate_annulus_mesh(double r_in, double r_out, int n_r, int n_theta, double a0,
                                     double a1)
{
    if (!(r_in > 0.0) || !(r_out > r_in) || n_r < 1 || n_theta < 3 || !(a1 > a0)) {
        throw GeometryError("invalid annulus parameters");
    }
    const bool closed = std::abs((a1 - a0) - 2.0 * M_PI) < 1e-14;
    const int n_ang = closed ? n_theta : n_theta + 1;
    TriangleMesh2D mesh;
    for (int j = 0; j <= n_r; ++j) {
        const double r = r_in + (r_out - r_in) * j / n_r;
        for (int i = 0; i < n_ang; ++i) {
            const double a = a0 + (a1 - a0) * i / n_theta;
            mesh.vertices.emplace_back(r * std::cos(a), r * std::sin(a));
        }
    }
    auto id = [&](int i, int j) { return j * n_ang + (i % n_ang); };
    for (int j = 0; j < n_r; ++j) {
        for (int i = 0; i < n_theta; ++i) {
            const int v00 = id(i, j);
            const int v10 = id(i + 1, j);
            const int v01 = id(i, j + 1);
            const int v11 = id(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    return mesh;
}

double arkkio_torque(const TriangleMesh2D& mesh, const std::vector<double>& times,
                     const std::vector<std::vector<double>>& values, double r_r, double r_s,
                     double L, double nu_a, double T)
{
    if (!(r_s > r_r) || !(T > 0.0)) {
        throw GeometryError("Arkkio torque needs r_r < r_s and T > 0");
    }
    if (times.empty() || times.size() != values.size()) {
        throw ArgumentError("Arkkio torque needs one nodal vector per time sample");
    }

    std::vector<int> sigma_elements;
    for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
        const auto& tri = mesh.triangles[e];
        const Eigen::Vector2d c =
            (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
        const double r = c.norm();
        if (r >= r_r && r <= r_s) {
            sigma_elements.push_back(e);
        }
    }
    if (sigma_elements.empty()) {
        throw GeometryError("annulus contains no mesh element");
    }

    auto slice_integral = [&](const std::vector<double>& u) {
        if (u.size() != mesh.vertices.size()) {
            throw ArgumentError("nodal vector size does not match the annulus mesh");
        }
        double sum = 0.0;
        for (const int e : sigma_elements) {
            const auto& tri = mesh.triangles[e];
            const Eigen::Vector2d& p0 = mesh.vertices[tri[0]];
            const Eigen::Vector2d& p1 = mesh.vertices[tri[1]];
            const Eigen::Vector2d& p2 = mesh.vertices[tri[2]];
            Eigen::Matrix2d J;
            J.col(0) = p1 - p0;
            J.col(1) = p2 - p0;
            const double area = 0.5 * std::abs(J.determinant());
            const Eigen::Vector2d du(u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
            const Eigen::Vector2d g = J.transpose().inverse() * du;
            for (const auto& q : degree5_rule()) {
                const Eigen::Vector2d x = q.lambda[0] * p0 + q.lambda[1] * p1 + q.lambda[2] * p2;
                sum += q.weight * area * g.dot(arkkio_Q(x) * g);
            }
        }
        return sum;
    };

    double time_integral = 0.0;
    if (times.size() == 1) {
        time_integral = T * slice_integral(values[0]);
    } else {
        std::vector<double> slices(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            slices[k] = slice_integral(values[k]);
        }
        for (std::size_t k = 0; k + 1 < times.size(); ++k) {
            time_integral += 0.5 * (times[k + 1] - times[k]) * (slices[k] + slices[k + 1]);
        }
    }
    return (1.0 / T) * (L * nu_a / (r_s - r_r)) * time_integral;
}

}  // namespace stshapeopt
