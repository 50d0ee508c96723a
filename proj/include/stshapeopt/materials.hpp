/**
 * @brief Per-phase conductivity and reluctivity laws, and the Arkkio torque weight.
 */
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

/** @brief Reluctivity value and its derivative with respect to s = |grad u|. */
struct ReluctivityValue {
    double nu = 0.0;
    double dnu = 0.0;
};

/**
 * @brief Either a constant reluctivity or the saturation curve
 * nu(s) = nu_a - (nu_a - c1) exp(-c2 s^c3).
 */
class ReluctivityLaw {
public:
    enum class Kind { Constant, Curve };

    static ReluctivityLaw constant(double value);
    static ReluctivityLaw curve(double nu_a, double c1, double c2, double c3);

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }

    /** @brief (nu(s), nu'(s)); throws ArgumentError for negative or non-finite s. */
    ReluctivityValue evaluate(double s) const;

    /** @brief nu'(s)/s with the removable singularity at s = 0 replaced by 0. */
    double dnu_over_s(double s) const;

    /** @brief Infimum of nu (c1 for the curve). */
    double nu_lower() const;
    /** @brief Supremum of nu (nu_a for the curve). */
    double nu_upper() const;
    /** @brief Lipschitz constant of s -> nu(s) s, i.e. sup of nu + s nu'. */
    double lipschitz_constant() const;

    double value() const { return value_; }
    double nu_a() const { return nu_a_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double c3() const { return c3_; }

private:
    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    double nu_a_ = 0.0;
    double c1_ = 0.0;
    double c2_ = 0.0;
    double c3_ = 0.0;
};

/** @brief Free-function form of ReluctivityLaw::evaluate. */
inline ReluctivityValue reluctivity(double s, const ReluctivityLaw& law) { return law.evaluate(s); }

struct PhaseMaterial {
    double sigma = 0.0;
    ReluctivityLaw nu;
};

/** @brief Map phase id -> (sigma, nu law). */
class MaterialLaw {
public:
    /** @brief Adds or replaces a phase; throws ConfigError for sigma < 0. */
    void set_phase(int id, double sigma, const ReluctivityLaw& nu);
    bool has_phase(int id) const { return phases_.count(id) > 0; }
    /** @brief Throws ConfigError for an undefined phase. */
    const PhaseMaterial& phase(int id) const;
    bool is_linear() const;
    const std::map<int, PhaseMaterial>& phases() const { return phases_; }

private:
    std::map<int, PhaseMaterial> phases_;
};

/** @brief Phase id per element together with the material table. Immutable. */
class PhaseLayout {
public:
    PhaseLayout(std::vector<int> element_phase, MaterialLaw materials);

    int phase(int element) const { return element_phase_[element]; }
    const PhaseMaterial& material(int element) const { return *element_material_[element]; }
    int num_elements() const { return static_cast<int>(element_phase_.size()); }
    const MaterialLaw& materials() const { return *materials_; }
    const std::vector<int>& element_phases() const { return element_phase_; }

private:
    std::vector<int> element_phase_;
    std::shared_ptr<const MaterialLaw> materials_;
    std::vector<const PhaseMaterial*> element_material_;
};

/**
 * @brief Arkkio torque weight Q(x) = |x|^{-1} [[x1 x2, (x2^2 - x1^2)/2], [(x2^2 - x1^2)/2, -x1 x2]].
 * Throws SingularityError at the origin.
 */
Eigen::Matrix2d arkkio_Q(const Eigen::Vector2d& x);

/** @brief Plain two-dimensional triangle mesh used for air-gap post-processing. */
struct TriangleMesh2D {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 3>> triangles;
};

/** @brief Structured mesh of the annular sector r_in <= |x| <= r_out, angle in [a0, a1]. */
TriangleMesh2D generate_annulus_mesh(double r_in, double r_out, int n_r, int n_theta,
                                     double a0 = 0.0, double a1 = 2.0 * M_PI);

/**
 * @brief Arkkio torque (1/T) (L nu_a / (r_s - r_r)) int_0^T int_Sigma Q grad u . grad u.
 *
 * values[k] holds the P1 nodal values at times[k]; the time integral uses the
 * trapezoid rule over the samples (a single sample is treated as constant in
 * time). Sigma is the set of triangles whose centroid radius lies in
 * [r_r, r_s]; each triangle uses a degree-5 rule. Throws GeometryError if
 * that set is empty.
 */
double arkkio_torque(const TriangleMesh2D& mesh, const std::vector<double>& times,
                     const std::vector<std::vector<double>>& values, double r_r, double r_s,
                     double L, double nu_a, double T);

}  // namespace stshapeopt
