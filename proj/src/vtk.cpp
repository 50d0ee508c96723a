#include "stshapeopt/vtk.hpp"

#include <fstream>
#include <locale>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

namespace {

void check_sizes(const std::vector<VtkField>& fields, int expected, const char* where)
{
    for (const auto& f : fields) {
        if (f.values.size() != expected) {
            throw ArgumentError(std::string(where) + " field '" + f.name + "' has " +
                                std::to_string(f.values.size()) + " values, expected " +
                                std::to_string(expected));
        }
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos) {
            throw ArgumentError("VTK field names must be non-empty and free of blanks");
        }
    }
}

void write_fields(std::ostream& out, const char* header, int count, const std::vector<VtkField>& fields)
{
    if (fields.empty()) {
        return;
    }
    out << header << ' ' << count << '\n';
    for (const auto& f : fields) {
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < count; ++i) {
            out << f.values(i) << '\n';
        }
    }
}

std::ofstream open(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out.imbue(std::locale::classic());
    out.precision(17);
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) {
        throw IoError("failed while writing " + path);
    }
}

VtkField phase_field(const std::vector<int>& phases)
{
    VtkField f{"phase", Eigen::VectorXd(static_cast<int>(phases.size()))};
    for (std::size_t i = 0; i < phases.size(); ++i) {
        f.values(static_cast<int>(i)) = phases[i];
    }
    return f;
}

}  // namespace

void write_spacetime_vtk(const std::string& path, const SpaceTimeMesh& mesh,
                         const std::vector<VtkField>& point_data,
                         const std::vector<VtkField>& cell_data)
{
    const int nv = mesh.num_vertices();
    const int ne = mesh.num_elements();
    check_sizes(point_data, nv, "point");
    check_sizes(cell_data, ne, "cell");
    std::vector<VtkField> cells{phase_field(mesh.element_phases())};
    cells.insert(cells.end(), cell_data.begin(), cell_data.end());

    std::ofstream out = open(path);
    out << "# vtk DataFile Version 3.0\nspace-time mesh (x, t)\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (int v = 0; v < nv; ++v) {
        const auto& p = mesh.vertex(v);
        out << p(1) << ' ' << p(0) << " 0\n";
    }
    out << "CELLS " << ne << ' ' << 4 * ne << '\n';
    for (const auto& tri : mesh.elements()) {
        out << "3 " << tri.v[0] << ' ' << tri.v[1] << ' ' << tri.v[2] << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    for (int e = 0; e < ne; ++e) {
        out << "5\n";
    }
    write_fields(out, "POINT_DATA", nv, point_data);
    write_fields(out, "CELL_DATA", ne, cells);
    finish(out, path);
}

void write_spatial_vtk(const std::string& path, const SpatialMesh& mesh,
                       const std::vector<VtkField>& point_data,
                       const std::vector<VtkField>& cell_data)
{
    const int nv = mesh.num_nodes();
    const int ne = mesh.num_elements();
    check_sizes(point_data, nv, "point");
    check_sizes(cell_data, ne, "cell");
    std::vector<VtkField> cells{phase_field(mesh.phase)};
    cells.insert(cells.end(), cell_data.begin(), cell_data.end());

    std::ofstream out = open(path);
    out << "# vtk DataFile Version 3.0\nspatial design mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (int i = 0; i < nv; ++i) {
        out << mesh.nodes[i] << " 0 0\n";
    }
    out << "CELLS " << ne << ' ' << 3 * ne << '\n';
    for (int e = 0; e < ne; ++e) {
        out << "2 " << e << ' ' << e + 1 << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    for (int e = 0; e < ne; ++e) {
        out << "3\n";
    }
    write_fields(out, "POINT_DATA", nv, point_data);
    write_fields(out, "CELL_DATA", ne, cells);
    finish(out, path);
}

}  // namespace stshapeopt
