#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace transfem {

/// Points in reference coordinates on the unit right simplex; weights sum to its volume.
struct QuadratureRule {
    int dim = 2;
    std::vector<double> points; // n_q * dim
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t q) const {
        return {points.data() + q * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

/// Scalar basis values B[q][b] and reference gradients D[q][b][k] at quadrature points.
struct Tabulation {
    int dim = 2;
    int n_q = 0;
    int n_b = 0;
    std::vector<double> basis;     // n_q * n_b
    std::vector<double> basis_der; // n_q * n_b * dim

    double value(int q, int b) const { return basis[static_cast<std::size_t>(q * n_b + b)]; }
    double derivative(int q, int b, int k) const {
        return basis_der[static_cast<std::size_t>((q * n_b + b) * dim + k)];
    }
};

struct BasisEvaluation {
    std::vector<double> values;    // n_b
    std::vector<double> gradients; // n_b * dim
};

double reference_volume(int dim);

/// P1 Lagrange basis on the reference simplex. Throws DomainError outside it (tolerance 1e-12).
BasisEvaluation p1_basis(int dim, std::span<const double> point);

/// Only order 1 (single barycenter point) is supported.
QuadratureRule quadrature_rule(int dim, int order);

/// Barycenter listed twice with half weights. Exercises N_q > 1 schedules
/// while staying exact for affine integrands.
QuadratureRule duplicated_midpoint_rule(int dim);

Tabulation tabulate(int dim, const QuadratureRule& rule);

} // namespace transfem
