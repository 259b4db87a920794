#include "transfem/mesh.hpp"

#include "transfem/error.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <string>

namespace transfem {

namespace {

double det2(double a, double b, double c, double d) { return a * d - b * c; }

// Jacobian of one cell, row-major: J[i][k] = v_{k+1}[i] - v_0[i].
std::array<double, 9> cell_jacobian(const Mesh& mesh, std::size_t c) {
    std::array<double, 9> jac{};
    const auto verts = mesh.cell(c);
    const auto v0 = mesh.vertex(static_cast<std::size_t>(verts[0]));
    const int d = mesh.dim;
    for (int k = 0; k < d; ++k) {
        const auto vk = mesh.vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(k + 1)]));
        for (int i = 0; i < d; ++i) jac[static_cast<std::size_t>(i * d + k)] = vk[static_cast<std::size_t>(i)] - v0[static_cast<std::size_t>(i)];
    }
    return jac;
}

double determinant(const std::array<double, 9>& j, int d) {
    if (d == 2) return det2(j[0], j[1], j[2], j[3]);
    return j[0] * det2(j[4], j[5], j[7], j[8]) - j[1] * det2(j[3], j[5], j[6], j[8]) +
           j[2] * det2(j[3], j[4], j[6], j[7]);
}

} // namespace

Mesh generate_unit_simplex_mesh(int dim, int n) {
    if (dim != 2 && dim != 3) throw DimensionError("mesh dimension must be 2 or 3, got " + std::to_string(dim));
    if (n < 1) throw DomainError("subdivisions per axis must be >= 1, got " + std::to_string(n));

    Mesh mesh;
    mesh.dim = dim;
    const int np = n + 1;
    const double h = 1.0 / n;

    if (dim == 2) {
        mesh.vertices.reserve(static_cast<std::size_t>(np * np * 2));
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < np; ++i) {
                mesh.vertices.push_back(i * h);
                mesh.vertices.push_back(j * h);
            }
        auto vid = [np](int i, int j) { return static_cast<Index>(i + np * j); };
        mesh.cells.reserve(static_cast<std::size_t>(2 * n * n * 3));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Index v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
                mesh.cells.insert(mesh.cells.end(), {v00, v10, v11});
                mesh.cells.insert(mesh.cells.end(), {v00, v11, v01});
            }
        return mesh;
    }

    mesh.vertices.reserve(static_cast<std::size_t>(np) * np * np * 3);
    for (int k = 0; k < np; ++k)
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < np; ++i) {
                mesh.vertices.push_back(i * h);
                mesh.vertices.push_back(j * h);
                mesh.vertices.push_back(k * h);
            }
    auto vid = [np](const std::array<int, 3>& p) { return static_cast<Index>(p[0] + np * (p[1] + np * p[2])); };

    // Kuhn subdivision: one tetrahedron per axis permutation, walking the
    // cube diagonal one unit step at a time. Odd permutations are reflected,
    // so their last two vertices are swapped.
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::pair<std::array<int, 3>, bool>> perms;
    do {
        int inversions = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                if (perm[static_cast<std::size_t>(a)] > perm[static_cast<std::size_t>(b)]) ++inversions;
        perms.emplace_back(perm, inversions % 2 == 1);
    } while (std::next_permutation(perm.begin(), perm.end()));

    mesh.cells.reserve(static_cast<std::size_t>(6) * n * n * n * 4);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (const auto& [axes, odd] : perms) {
                    std::array<int, 3> p{i, j, k};
                    std::array<Index, 4> tet{};
                    tet[0] = vid(p);
                    for (std::size_t s = 0; s < 3; ++s) {
                        ++p[static_cast<std::size_t>(axes[s])];
                        tet[s + 1] = vid(p);
                    }
                    if (odd) std::swap(tet[2], tet[3]);
                    mesh.cells.insert(mesh.cells.end(), tet.begin(), tet.end());
                }
    return mesh;
}

double cell_volume(const Mesh& mesh, std::size_t cell) {
    const double det = determinant(cell_jacobian(mesh, cell), mesh.dim);
    return mesh.dim == 2 ? det / 2.0 : det / 6.0;
}

CellGeometry compute_geometry(const Mesh& mesh) {
    if (mesh.dim != 2 && mesh.dim != 3) throw DimensionError("mesh dimension must be 2 or 3");
    const int d = mesh.dim;
    const std::size_t nc = mesh.n_cells();
    CellGeometry geom;
    geom.dim = d;
    geom.inv_jacobians.resize(nc * static_cast<std::size_t>(d * d));
    geom.determinants.resize(nc);

    for (std::size_t c = 0; c < nc; ++c) {
        const auto j = cell_jacobian(mesh, c);
        const double det = determinant(j, d);
        if (!(det > 0.0)) throw OrientationError(c, det);
        geom.determinants[c] = det;
        double* inv = geom.inv_jacobians.data() + c * static_cast<std::size_t>(d * d);
        if (d == 2) {
            inv[0] = j[3] / det;
            inv[1] = -j[1] / det;
            inv[2] = -j[2] / det;
            inv[3] = j[0] / det;
        } else {
            // adjugate / det
            inv[0] = det2(j[4], j[5], j[7], j[8]) / det;
            inv[1] = -det2(j[1], j[2], j[7], j[8]) / det;
            inv[2] = det2(j[1], j[2], j[4], j[5]) / det;
            inv[3] = -det2(j[3], j[5], j[6], j[8]) / det;
            inv[4] = det2(j[0], j[2], j[6], j[8]) / det;
            inv[5] = -det2(j[0], j[2], j[3], j[5]) / det;
            inv[6] = det2(j[3], j[4], j[6], j[7]) / det;
            inv[7] = -det2(j[0], j[1], j[6], j[7]) / det;
            inv[8] = det2(j[0], j[1], j[3], j[4]) / det;
        }
    }
    return geom;
}

std::vector<double> gather_coefficients(const Mesh& mesh, const FieldLayout& layout, std::span<const double> global) {
    if (global.size() != layout.global_size(mesh))
        throw ShapeError("global vector has length " + std::to_string(global.size()) + ", expected " +
                         std::to_string(layout.global_size(mesh)));
    const auto nb = static_cast<std::size_t>(mesh.vertices_per_cell());
    const auto nc = static_cast<std::size_t>(layout.n_comp);
    std::vector<double> out(layout.cell_array_size(mesh));
    std::size_t pos = 0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const auto verts = mesh.cell(c);
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t k = 0; k < nc; ++k) out[pos++] = global[static_cast<std::size_t>(verts[b]) * nc + k];
    }
    return out;
}

std::vector<double> scatter_add_element_vectors(const Mesh& mesh, const FieldLayout& layout,
                                                std::span<const double> elem_vecs) {
    if (elem_vecs.size() != layout.cell_array_size(mesh))
        throw ShapeError("element vector array has length " + std::to_string(elem_vecs.size()) + ", expected " +
                         std::to_string(layout.cell_array_size(mesh)));
    const auto nb = static_cast<std::size_t>(mesh.vertices_per_cell());
    const auto nc = static_cast<std::size_t>(layout.n_comp);
    std::vector<double> global(layout.global_size(mesh), 0.0);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const auto verts = mesh.cell(c);
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t k = 0; k < nc; ++k) global[static_cast<std::size_t>(verts[b]) * nc + k] += elem_vecs[pos++];
    }
    return global;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    os << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << '\n';
    const auto old_precision = os.precision(17);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
        const auto x = mesh.vertex(v);
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << x[i];
        os << '\n';
    }
    os.precision(old_precision);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const auto verts = mesh.cell(c);
        for (std::size_t i = 0; i < verts.size(); ++i) os << (i ? " " : "") << verts[i];
        os << '\n';
    }
}

} // namespace transfem
