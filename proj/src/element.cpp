#include "transfem/element.hpp"

#include "transfem/error.hpp"

#include <string>

namespace transfem {

namespace {

void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw DimensionError("element dimension must be 2 or 3, got " + std::to_string(dim));
}

constexpr double kInsideTolerance = 1e-12;

} // namespace

double reference_volume(int dim) {
    check_dim(dim);
    return dim == 2 ? 0.5 : 1.0 / 6.0;
}

BasisEvaluation p1_basis(int dim, std::span<const double> point) {
    check_dim(dim);
    if (point.size() != static_cast<std::size_t>(dim))
        throw ShapeError("reference point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(dim));
    double sum = 0.0;
    for (double x : point) {
        if (x < -kInsideTolerance) throw DomainError("point lies outside the reference simplex");
        sum += x;
    }
    if (sum > 1.0 + kInsideTolerance) throw DomainError("point lies outside the reference simplex");

    const auto d = static_cast<std::size_t>(dim);
    BasisEvaluation out;
    out.values.resize(d + 1);
    out.gradients.assign((d + 1) * d, 0.0);
    out.values[0] = 1.0 - sum;
    for (std::size_t k = 0; k < d; ++k) {
        out.values[k + 1] = point[k];
        out.gradients[k] = -1.0;
        out.gradients[(k + 1) * d + k] = 1.0;
    }
    return out;
}

QuadratureRule quadrature_rule(int dim, int order) {
    check_dim(dim);
    if (order != 1)
        throw CapabilityError("quadrature order " + std::to_string(order) + " is not supported (only order 1)");
    QuadratureRule rule;
    rule.dim = dim;
    rule.points.assign(static_cast<std::size_t>(dim), 1.0 / (dim + 1));
    rule.weights = {reference_volume(dim)};
    return rule;
}

QuadratureRule duplicated_midpoint_rule(int dim) {
    QuadratureRule rule = quadrature_rule(dim, 1);
    rule.points.insert(rule.points.end(), rule.points.begin(), rule.points.end());
    rule.weights = {rule.weights[0] / 2, rule.weights[0] / 2};
    return rule;
}

Tabulation tabulate(int dim, const QuadratureRule& rule) {
    check_dim(dim);
    if (rule.dim != dim) throw DimensionError("quadrature rule dimension does not match element dimension");
    if (rule.points.size() != rule.size() * static_cast<std::size_t>(dim))
        throw ShapeError("quadrature rule points and weights disagree in size");

    Tabulation tab;
    tab.dim = dim;
    tab.n_q = static_cast<int>(rule.size());
    tab.n_b = dim + 1;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto eval = p1_basis(dim, rule.point(q));
        tab.basis.insert(tab.basis.end(), eval.values.begin(), eval.values.end());
        tab.basis_der.insert(tab.basis_der.end(), eval.gradients.begin(), eval.gradients.end());
    }
    return tab;
}

} // namespace transfem
