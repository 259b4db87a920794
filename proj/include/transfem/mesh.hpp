#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace transfem {

using Index = std::int32_t;

/// Simplicial mesh: d+1 vertices per cell, coordinates stored interleaved.
struct Mesh {
    int dim = 2;
    std::vector<double> vertices; // n_vertices * dim
    std::vector<Index> cells;     // n_cells * (dim + 1)

    std::size_t n_vertices() const { return vertices.size() / static_cast<std::size_t>(dim); }
    std::size_t n_cells() const { return cells.size() / static_cast<std::size_t>(dim + 1); }
    int vertices_per_cell() const { return dim + 1; }

    std::span<const double> vertex(std::size_t v) const {
        return {vertices.data() + v * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const Index> cell(std::size_t c) const {
        return {cells.data() + c * static_cast<std::size_t>(dim + 1), static_cast<std::size_t>(dim + 1)};
    }
};

/// Per-cell affine map data. inv_jacobians is row-major d x d per cell.
struct CellGeometry {
    int dim = 2;
    std::vector<double> inv_jacobians;
    std::vector<double> determinants;

    std::size_t n_cells() const { return determinants.size(); }
    std::span<const double> inv_jacobian(std::size_t c) const {
        const auto dd = static_cast<std::size_t>(dim * dim);
        return {inv_jacobians.data() + c * dd, dd};
    }
};

/// Global vectors are [vertex][component]; per-cell blocks are [cell][basis][component].
struct FieldLayout {
    int n_comp = 1;

    std::size_t global_size(const Mesh& mesh) const { return mesh.n_vertices() * static_cast<std::size_t>(n_comp); }
    std::size_t cell_block(const Mesh& mesh) const {
        return static_cast<std::size_t>(mesh.vertices_per_cell() * n_comp);
    }
    std::size_t cell_array_size(const Mesh& mesh) const { return mesh.n_cells() * cell_block(mesh); }
};

/// Unit square (2 triangles per square) or unit cube (6 Kuhn tetrahedra per cube), n subdivisions per axis.
Mesh generate_unit_simplex_mesh(int dim, int n);

/// Jacobian columns are v_k - v_0; throws OrientationError for detJ <= 0.
CellGeometry compute_geometry(const Mesh& mesh);

/// Signed measure of one cell computed from its coordinates.
double cell_volume(const Mesh& mesh, std::size_t cell);

std::vector<double> gather_coefficients(const Mesh& mesh, const FieldLayout& layout, std::span<const double> global);

/// Sums element vectors into a global vector in ascending cell order.
std::vector<double> scatter_add_element_vectors(const Mesh& mesh, const FieldLayout& layout,
                                                std::span<const double> elem_vecs);

/// Debug dump: "dim n_vertices n_cells", then vertex lines, then cell lines.
void write_mesh(std::ostream& os, const Mesh& mesh);

} // namespace transfem
