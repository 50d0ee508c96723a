/**
 * @brief Legacy ASCII VTK (version 3.0) UNSTRUCTURED_GRID exporters.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stshapeopt/spacetime_mesh.hpp"

namespace stshapeopt {

/** @brief Named scalar field, one value per point or per cell. */
struct VtkField {
    std::string name;
    Eigen::VectorXd values;
};

/**
 * @brief Space-time mesh as triangles (cell type 5) with points (x, t, 0).
 * A cell field "phase" is always written. Throws IoError on write failure
 * and ArgumentError when a field has the wrong length.
 */
void write_spacetime_vtk(const std::string& path, const SpaceTimeMesh& mesh,
                         const std::vector<VtkField>& point_data = {},
                         const std::vector<VtkField>& cell_data = {});

/**
 * @brief Spatial design mesh as line cells (cell type 3) with points (xi, 0, 0).
 * A cell field "phase" is always written.
 */
void write_spatial_vtk(const std::string& path, const SpatialMesh& mesh,
                       const std::vector<VtkField>& point_data = {},
                       const std::vector<VtkField>& cell_data = {});

}  // namespace stshapeopt
