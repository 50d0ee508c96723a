/**
 * @brief Fixed quadrature rules on triangles (barycentric points, weights summing to 1).
 */
#pragma once

#include <array>
#include <cmath>

namespace stshapeopt {

struct TriangleQuadPoint {
    std::array<double, 3> lambda;
    double weight;
};

/** @brief Edge-midpoint rule, exact for quadratics. */
inline const std::array<TriangleQuadPoint, 3>& midpoint_rule()
{
    static const std::array<TriangleQuadPoint, 3> rule{{
        {{0.5, 0.5, 0.0}, 1.0 / 3.0},
        {{0.0, 0.5, 0.5}, 1.0 / 3.0},
        {{0.5, 0.0, 0.5}, 1.0 / 3.0},
    }};
    return rule;
}

/** @brief Seven-point rule exact for polynomials of degree 5. */
inline const std::array<TriangleQuadPoint, 7>& degree5_rule()
{
    static const double r = std::sqrt(15.0);
    static const double a1 = (9.0 - 2.0 * r) / 21.0;
    static const double b1 = (6.0 + r) / 21.0;
    static const double a2 = (9.0 + 2.0 * r) / 21.0;
    static const double b2 = (6.0 - r) / 21.0;
    static const double w0 = 9.0 / 40.0;
    static const double w1 = (155.0 + r) / 1200.0;
    static const double w2 = (155.0 - r) / 1200.0;
    static const std::array<TriangleQuadPoint, 7> rule{{
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, w0},
        {{a1, b1, b1}, w1},
        {{b1, a1, b1}, w1},
        {{b1, b1, a1}, w1},
        {{a2, b2, b2}, w2},
        {{b2, a2, b2}, w2},
        {{b2, b2, a2}, w2},
    }};
    return rule;
}

/** @brief Two-point Gauss-Legendre rule on [0,1]. */
inline const std::array<std::array<double, 2>, 2>& gauss2_unit()
{
    static const std::array<std::array<double, 2>, 2> rule{{
        {0.5 - 0.28867513459481287, 0.5},
        {0.5 + 0.28867513459481287, 0.5},
    }};
    return rule;
}

}  // namespace stshapeopt
