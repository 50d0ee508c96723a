#include "stshapeopt/spacetime_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

namespace {

double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1)));
}

Vec<1> vec1(double x)
{
    Vec<1> v;
    v(0) = x;
    return v;
}

}  // namespace

SpaceTimeMesh::SpaceTimeMesh(int n_x, int n_t, double T, std::vector<double> xi,
                             std::vector<int> column_phase, std::vector<int> interface_nodes,
                             Motion1 motion)
    : n_x_(n_x),
      n_t_(n_t),
      T_(T),
      xi_(std::move(xi)),
      column_phase_(std::move(column_phase)),
      interface_nodes_(std::move(interface_nodes)),
      motion_(std::move(motion)),
      periodic_line_(n_x + 1, true)
{
    if (static_cast<int>(xi_.size()) != n_x_ + 1 ||
        static_cast<int>(column_phase_.size()) != n_x_) {
        throw GeometryError("reference grid does not match n_x");
    }
    if (!(T_ > 0.0)) {
        throw GeometryError("period T must be positive");
    }
    build_vertices();

    // Checkerboard diagonals; orientation fixed from reference coordinates.
    std::vector<Eigen::Vector2d> ref(vertices_.size());
    for (int v = 0; v < num_vertices(); ++v) {
        ref[v] = reference_coord(v);
    }
    triangles_.reserve(2 * n_x_ * n_t_);
    for (int k = 0; k < n_t_; ++k) {
        for (int i = 0; i < n_x_; ++i) {
            const int v00 = vertex_id(i, k);
            const int v10 = vertex_id(i + 1, k);
            const int v01 = vertex_id(i, k + 1);
            const int v11 = vertex_id(i + 1, k + 1);
            std::array<std::array<int, 3>, 2> tris;
            if ((i + k) % 2 == 0) {
                tris = {{{v00, v10, v11}, {v00, v11, v01}}};
            } else {
                tris = {{{v00, v10, v01}, {v10, v11, v01}}};
            }
            for (auto tri : tris) {
                if (orient(ref[tri[0]], ref[tri[1]], ref[tri[2]]) < 0.0) {
                    std::swap(tri[1], tri[2]);
                }
                triangles_.push_back(Triangle{tri, column_phase_[i], i, k});
            }
        }
    }

    for (int e = 0; e < num_elements(); ++e) {
        const Triangle& tr = triangles_[e];
        for (int a = 0; a < 3; ++a) {
            const int p = tr.v[a];
            const int q = tr.v[(a + 1) % 3];
            const int ip = grid_i(p), iq = grid_i(q), kp = grid_k(p), kq = grid_k(q);
            if (ip == iq && (ip == 0 || ip == n_x_)) {
                facets_.push_back({p, q, BoundaryTag::Lateral, e});
            } else if (kp == kq && kp == 0) {
                facets_.push_back({p, q, BoundaryTag::Bottom, e});
            } else if (kp == kq && kp == n_t_) {
                facets_.push_back({p, q, BoundaryTag::Top, e});
            }
        }
    }

    for (int i = 0; i <= n_x_; ++i) {
        pairs_.emplace_back(vertex_id(i, 0), vertex_id(i, n_t_));
    }
}

void SpaceTimeMesh::build_vertices()
{
    vertices_.assign((n_x_ + 1) * (n_t_ + 1), Eigen::Vector2d::Zero());
    for (int k = 0; k <= n_t_; ++k) {
        const double t = level(k);
        for (int i = 0; i <= n_x_; ++i) {
            vertices_[vertex_id(i, k)] = Eigen::Vector2d(t, motion_.forward(t, vec1(xi_[i]))(0));
        }
    }
}

Eigen::Vector2d SpaceTimeMesh::reference_coord(int v) const
{
    return Eigen::Vector2d(level(grid_k(v)), xi_[grid_i(v)]);
}

std::vector<int> SpaceTimeMesh::element_phases() const
{
    std::vector<int> ph(triangles_.size());
    for (std::size_t e = 0; e < triangles_.size(); ++e) {
        ph[e] = triangles_[e].phase;
    }
    return ph;
}

double SpaceTimeMesh::signed_area(int e) const
{
    const auto& v = triangles_[e].v;
    return orient(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double SpaceTimeMesh::min_signed_area() const
{
    double m = std::numeric_limits<double>::infinity();
    for (int e = 0; e < num_elements(); ++e) {
        m = std::min(m, signed_area(e));
    }
    return m;
}

int SpaceTimeMesh::element_touching(int column, int slab, int grid_line) const
{
    const int base = 2 * (slab * n_x_ + column);
    const int a = vertex_id(grid_line, slab);
    const int b = vertex_id(grid_line, slab + 1);
    for (int e = base; e < base + 2; ++e) {
        const auto& v = triangles_[e].v;
        const bool has_a = std::find(v.begin(), v.end(), a) != v.end();
        const bool has_b = std::find(v.begin(), v.end(), b) != v.end();
        if (has_a && has_b) {
            return e;
        }
    }
    throw GeometryError("no element of cell touches grid line " + std::to_string(grid_line));
}

SpatialMesh SpaceTimeMesh::spatial_mesh() const
{
    SpatialMesh s;
    s.nodes = xi_;
    s.phase = column_phase_;
    s.design_boundary.assign(n_x_ + 1, false);
    s.design_boundary.front() = true;
    s.design_boundary.back() = true;
    return s;
}

void SpaceTimeMesh::set_periodic_lines(std::vector<bool> mask)
{
    if (static_cast<int>(mask.size()) != n_x_ + 1) {
        throw GeometryError("periodicity mask size mismatch");
    }
    periodic_line_ = std::move(mask);
}

void SpaceTimeMesh::set_reference_grid(std::vector<double> xi)
{
    if (static_cast<int>(xi.size()) != n_x_ + 1) {
        throw GeometryError("reference grid size mismatch");
    }
    xi_ = std::move(xi);
    build_vertices();
}

SpaceTimeMesh generate_1d_example_mesh(int n_x, int n_t, const std::vector<double>& interfaces,
                                       const Motion1& motion, double T,
                                       std::vector<int> segment_phases)
{
    if (n_x < 4 || n_t < 2) {
        throw GeometryError("mesh needs n_x >= 4 and n_t >= 2");
    }
    for (std::size_t j = 0; j < interfaces.size(); ++j) {
        if (!(interfaces[j] > 0.0 && interfaces[j] < 1.0)) {
            throw GeometryError("interface " + std::to_string(interfaces[j]) + " outside (0,1)");
        }
        if (j > 0 && !(interfaces[j] > interfaces[j - 1])) {
            throw GeometryError("interfaces must be strictly increasing");
        }
    }
    const int n_seg = static_cast<int>(interfaces.size()) + 1;
    if (n_x < n_seg) {
        throw GeometryError("n_x smaller than the number of phase segments");
    }
    if (segment_phases.empty()) {
        for (int s = 0; s < n_seg; ++s) {
            segment_phases.push_back(s % 2 == 0 ? 2 : 1);
        }
    }
    if (static_cast<int>(segment_phases.size()) != n_seg) {
        throw GeometryError("one phase id per segment required");
    }

    std::vector<double> bounds{0.0};
    bounds.insert(bounds.end(), interfaces.begin(), interfaces.end());
    bounds.push_back(1.0);

    // Interface j sits on grid line round(a_j n_x), kept strictly increasing.
    std::vector<int> lines{0};
    for (int j = 1; j < n_seg; ++j) {
        int line = static_cast<int>(std::lround(bounds[j] * n_x));
        line = std::max(line, lines.back() + 1);
        line = std::min(line, n_x - (n_seg - j));
        lines.push_back(line);
    }
    lines.push_back(n_x);

    std::vector<double> xi(n_x + 1);
    std::vector<int> column_phase(n_x);
    for (int s = 0; s < n_seg; ++s) {
        const int c = lines[s + 1] - lines[s];
        for (int m = 0; m <= c; ++m) {
            xi[lines[s] + m] = bounds[s] + (bounds[s + 1] - bounds[s]) * m / c;
        }
        for (int i = lines[s]; i < lines[s + 1]; ++i) {
            column_phase[i] = segment_phases[s];
        }
    }
    std::vector<int> interface_nodes(lines.begin() + 1, lines.end() - 1);
    return SpaceTimeMesh(n_x, n_t, T, std::move(xi), std::move(column_phase),
                         std::move(interface_nodes), motion);
}

SpaceTimeMesh deform_mesh(const SpaceTimeMesh& mesh, const Eigen::VectorXd& theta, double tau)
{
    if (theta.size() != mesh.n_x() + 1) {
        throw GeometryError("deformation field size does not match the spatial mesh");
    }
    std::vector<double> xi = mesh.xi();
    for (int i = 0; i <= mesh.n_x(); ++i) {
        xi[i] += tau * theta(i);
    }
    SpaceTimeMesh out = mesh;
    out.set_reference_grid(std::move(xi));
    for (int e = 0; e < out.num_elements(); ++e) {
        if (!(out.signed_area(e) > 0.0)) {
            throw InvertedElementError("element " + std::to_string(e) + " inverted by deformation",
                                       e);
        }
    }
    return out;
}

std::array<double, 3> barycentric(const SpaceTimeMesh& mesh, int e, const Eigen::Vector2d& p)
{
    const auto& v = mesh.element(e).v;
    const Eigen::Vector2d& a = mesh.vertex(v[0]);
    const Eigen::Vector2d& b = mesh.vertex(v[1]);
    const Eigen::Vector2d& c = mesh.vertex(v[2]);
    const double area = orient(a, b, c);
    const double l0 = orient(p, b, c) / area;
    const double l1 = orient(a, p, c) / area;
    return {l0, l1, 1.0 - l0 - l1};
}

std::vector<TrajectoryPiece> vertical_line_elements(const SpaceTimeMesh& mesh, double x0)
{
    constexpr double nudge = 1e-12;
    constexpr double exit_tol = 1e-10;
    const auto& xi = mesh.xi();
    if (x0 < xi.front() - exit_tol || x0 > xi.back() + exit_tol) {
        throw GeometryError("trajectory start " + std::to_string(x0) + " outside the design region");
    }
    x0 = std::clamp(x0, xi.front() + nudge, xi.back() - nudge);

    const int column = static_cast<int>(
        std::upper_bound(xi.begin(), xi.end(), x0) - xi.begin() - 1);
    const Motion1& motion = mesh.motion();
    auto point = [&](double t) { return Eigen::Vector2d(t, motion.forward(t, vec1(x0))(0)); };
    auto min_lambda = [&](int e, double t) {
        const auto l = barycentric(mesh, e, point(t));
        return std::min({l[0], l[1], l[2]});
    };

    std::vector<TrajectoryPiece> pieces;
    for (int k = 0; k < mesh.n_t(); ++k) {
        const double ta = mesh.level(k);
        const double tb = mesh.level(k + 1);
        std::vector<int> candidates;
        for (int c = std::max(0, column - 1); c <= std::min(mesh.n_x() - 1, column + 1); ++c) {
            candidates.push_back(2 * (k * mesh.n_x() + c));
            candidates.push_back(2 * (k * mesh.n_x() + c) + 1);
        }

        // Breakpoints: zero crossings of every barycentric coordinate along the slab.
        std::vector<double> breaks{ta, tb};
        constexpr int samples = 16;
        for (const int e : candidates) {
            for (int j = 0; j < 3; ++j) {
                auto lam = [&](double t) { return barycentric(mesh, e, point(t))[j]; };
                double t_prev = ta;
                double l_prev = lam(ta);
                for (int s = 1; s <= samples; ++s) {
                    const double t_cur = ta + (tb - ta) * s / samples;
                    const double l_cur = lam(t_cur);
                    if ((l_prev < 0.0) != (l_cur < 0.0)) {
                        double lo = t_prev, hi = t_cur;
                        const bool lo_neg = l_prev < 0.0;
                        for (int it = 0; it < 60; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            if ((lam(mid) < 0.0) == lo_neg) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        breaks.push_back(0.5 * (lo + hi));
                    }
                    t_prev = t_cur;
                    l_prev = l_cur;
                }
            }
        }
        std::sort(breaks.begin(), breaks.end());
        const double dt_min = 1e-14 * (tb - ta);
        // Drop breakpoints that crowd the slab ends or each other; the slab ends are kept exactly.
        std::vector<double> cuts{ta};
        for (const double t : breaks) {
            if (t - cuts.back() > dt_min && tb - t > dt_min) {
                cuts.push_back(t);
            }
        }
        cuts.push_back(tb);
        for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
            const double t0 = cuts[b];
            const double t1 = cuts[b + 1];
            const double tm = 0.5 * (t0 + t1);
            int best = -1;
            double best_val = -std::numeric_limits<double>::infinity();
            for (const int e : candidates) {
                const double val = min_lambda(e, tm);
                if (val > best_val) {
                    best_val = val;
                    best = e;
                }
            }
            if (best_val < -exit_tol) {
                throw GeometryError("trajectory from x0=" + std::to_string(x0) +
                                    " leaves the mesh at t=" + std::to_string(tm));
            }
            if (!pieces.empty() && pieces.back().element == best &&
                std::abs(pieces.back().t1 - t0) <= dt_min) {
                pieces.back().t1 = t1;
            } else {
                pieces.push_back({best, t0, t1});
            }
        }
    }
    return pieces;
}

}  // namespace stshapeopt
