/**
 * @brief Structured space-time triangle meshes of Q = {(t,x) : x in phi_t(D)}, D = (0,1).
 *
 * Vertices are generated on a reference grid (t_k, xi_i) and placed at
 * (t_k, phi_{t_k}(xi_i)). Vertex (i,k) has index k (n_x + 1) + i. Each
 * reference cell is split along one diagonal, alternating in a checkerboard
 * pattern, so every triangle belongs to exactly one reference column.
 */
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stshapeopt/motion.hpp"

namespace stshapeopt {

enum class BoundaryTag { Lateral, Bottom, Top };

struct Triangle {
    std::array<int, 3> v;  ///< counter-clockwise in the (t, x) plane
    int phase = 0;
    int column = 0;  ///< reference column i, between grid nodes i and i+1
    int slab = 0;    ///< time slab k, between levels k and k+1
};

struct BoundaryFacet {
    int v0 = 0;
    int v1 = 0;
    BoundaryTag tag = BoundaryTag::Lateral;
    int element = 0;
};

/** @brief Bottom trace of a space-time mesh: the spatial design mesh. */
struct SpatialMesh {
    std::vector<double> nodes;         ///< reference coordinates xi_0 < ... < xi_{n_x}
    std::vector<int> phase;            ///< phase id per segment
    std::vector<bool> design_boundary; ///< per node; true where theta is held at zero

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_elements() const { return static_cast<int>(phase.size()); }
    double length(int e) const { return nodes[e + 1] - nodes[e]; }
};

/** @brief One piece of a vertical trajectory inside one element. */
struct TrajectoryPiece {
    int element = 0;
    double t0 = 0.0;
    double t1 = 0.0;
};

class SpaceTimeMesh {
public:
    SpaceTimeMesh(int n_x, int n_t, double T, std::vector<double> xi, std::vector<int> column_phase,
                  std::vector<int> interface_nodes, Motion1 motion);

    int n_x() const { return n_x_; }
    int n_t() const { return n_t_; }
    double period() const { return T_; }
    const Motion1& motion() const { return motion_; }

    int vertex_id(int i, int k) const { return k * (n_x_ + 1) + i; }
    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(triangles_.size()); }

    /** @brief Physical coordinates (t, x) of a vertex. */
    const Eigen::Vector2d& vertex(int v) const { return vertices_[v]; }
    /** @brief Reference coordinates (t, xi) of a vertex. */
    Eigen::Vector2d reference_coord(int v) const;
    int grid_i(int v) const { return v % (n_x_ + 1); }
    int grid_k(int v) const { return v / (n_x_ + 1); }

    const Triangle& element(int e) const { return triangles_[e]; }
    const std::vector<Triangle>& elements() const { return triangles_; }
    const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }
    /** @brief (bottom vertex, top vertex) pairs, index-wise under the motion. */
    const std::vector<std::pair<int, int>>& periodic_pairs() const { return pairs_; }
    /** @brief Whether the bottom and top vertices of grid line i are identified. */
    bool periodic_line(int i) const { return periodic_line_[i]; }
    /** @brief Identification mask over the grid lines; every line is periodic by default. */
    void set_periodic_lines(std::vector<bool> mask);

    double level(int k) const { return T_ * k / n_t_; }
    /** @brief Current reference grid xi_i. */
    const std::vector<double>& xi() const { return xi_; }
    /** @brief Grid indices of the interface lines. */
    const std::vector<int>& interface_nodes() const { return interface_nodes_; }
    const std::vector<int>& column_phase() const { return column_phase_; }
    std::vector<int> element_phases() const;

    double signed_area(int e) const;
    double min_signed_area() const;
    /** @brief Index of the element of cell (i,k) adjacent to the vertical grid line i or i+1. */
    int element_touching(int column, int slab, int grid_line) const;

    SpatialMesh spatial_mesh() const;

    /** @brief Rebuild vertex positions from the reference grid; used after deformation. */
    void set_reference_grid(std::vector<double> xi);

private:
    void build_vertices();

    int n_x_;
    int n_t_;
    double T_;
    std::vector<double> xi_;
    std::vector<int> column_phase_;
    std::vector<int> interface_nodes_;
    Motion1 motion_;
    std::vector<Eigen::Vector2d> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryFacet> facets_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<bool> periodic_line_;
};

/**
 * @brief Mesh of Q over the reference interval (0,1) with grid lines on each interface.
 *
 * The n_x cells are distributed over the segments between interfaces in
 * proportion to their lengths (each segment gets at least one cell); the
 * grid is uniform when every interface lies on the uniform grid. Segment s
 * gets phase segment_phases[s]; by default segments alternate 2, 1, 2, ...
 * Throws GeometryError for interfaces outside (0,1), unsorted or coincident
 * interfaces, or n_x < 4, n_t < 2.
 */
SpaceTimeMesh generate_1d_example_mesh(int n_x, int n_t, const std::vector<double>& interfaces,
                                       const Motion1& motion, double T = 1.0,
                                       std::vector<int> segment_phases = {});

/**
 * @brief Moves reference nodes xi <- xi + tau theta(xi) and re-applies the motion.
 *
 * theta holds P1 nodal values on the spatial mesh. Throws InvertedElementError
 * if any element area becomes non-positive.
 */
SpaceTimeMesh deform_mesh(const SpaceTimeMesh& mesh, const Eigen::VectorXd& theta, double tau);

/**
 * @brief Elements crossed by the trajectory t -> (t, phi_t(x0)), x0 a reference point.
 *
 * Pieces are ordered in time and cover [0, T]. A point on the lateral
 * boundary is nudged inwards by 1e-12. Throws GeometryError if the
 * trajectory leaves the mesh by more than 1e-10.
 */
std::vector<TrajectoryPiece> vertical_line_elements(const SpaceTimeMesh& mesh, double x0);

/** @brief Barycentric coordinates of the point p = (t, x) in element e. */
std::array<double, 3> barycentric(const SpaceTimeMesh& mesh, int e, const Eigen::Vector2d& p);

}  // namespace stshapeopt
