#pragma once

#include "transfem/element.hpp"
#include "transfem/mesh.hpp"
#include "transfem/physics.hpp"

#include <span>
#include <vector>

namespace transfem {

enum class AuxSpace {
    cell_constant, ///< P0: n_aux values per cell, zero gradient
    nodal,         ///< same P1 space as the solution: [cell][basis][aux] blocks
};

/// Auxiliary coefficient field in per-cell layout.
struct AuxField {
    AuxSpace space = AuxSpace::cell_constant;
    int n_aux = 1;
    std::vector<double> values;

    std::size_t per_cell(int dim) const {
        return space == AuxSpace::cell_constant ? static_cast<std::size_t>(n_aux)
                                                : static_cast<std::size_t>((dim + 1) * n_aux);
    }
};

AuxField make_cell_constant_aux(std::vector<double> per_cell_values, int n_aux = 1);
/// Gathers a global [vertex][aux] vector into per-cell blocks.
AuxField make_nodal_aux(const Mesh& mesh, std::span<const double> global, int n_aux = 1);

/// Validates aux against the form and cell count; throws MissingAuxiliaryError / ShapeError.
void check_aux(const PhysicsForm& form, const AuxField* aux, std::size_t n_cells, int dim);

/// Serial element integration in f64. Output is [cell][basis][component].
std::vector<double> integrate_reference(const Tabulation& tab, const QuadratureRule& rule, const CellGeometry& geom,
                                        const PhysicsForm& form, std::span<const double> coeffs,
                                        const AuxField* aux = nullptr);

/// Same as integrate_reference restricted to cells [begin, end). `out` holds
/// only those cells' element vectors.
void integrate_reference_cells(const Tabulation& tab, const QuadratureRule& rule, const CellGeometry& geom,
                               const PhysicsForm& form, std::span<const double> coeffs, const AuxField* aux,
                               std::size_t begin, std::size_t end, std::span<double> out);

/// Scatter-adds element vectors into the global residual.
std::vector<double> assemble_residual(const Mesh& mesh, const FieldLayout& layout, std::span<const double> elem_vecs);

} // namespace transfem
