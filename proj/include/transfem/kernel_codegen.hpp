#pragma once

#include "transfem/execution_geometry.hpp"
#include "transfem/physics.hpp"
#include "transfem/transpose_executor.hpp"

#include <string>

namespace transfem {

struct KernelSpecialization {
    int dim = 2;
    int n_b = 3;
    int n_comp = 1;
    int n_q = 1;
    int n_bl = 1;
    int n_cb = 1;
    std::string scalar; ///< "float" or "double"
};

struct KernelSource {
    std::string text;
    std::string entry_name;
    KernelSpecialization specialization;
};

/// OpenCL C text of the transposed integration kernel for one geometry and
/// form, with the form's f0/f1 sources inlined. Quadrature weights and the
/// basis tabulation for the given rule are baked in as constants.
/// Deterministic: identical inputs give byte-identical text.
KernelSource generate_kernel_source(const ExecutionGeometry& geom, const PhysicsForm& form, Precision scalar,
                                    const QuadratureRule& rule, const Tabulation& tab);

/// Convenience overload using the single-point rule when geom.n_q == 1, the
/// duplicated-midpoint rule when geom.n_q == 2.
KernelSource generate_kernel_source(const ExecutionGeometry& geom, const PhysicsForm& form, Precision scalar);

} // namespace transfem
