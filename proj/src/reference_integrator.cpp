#include "transfem/reference_integrator.hpp"

#include "transfem/error.hpp"

#include <string>

namespace transfem {

AuxField make_cell_constant_aux(std::vector<double> per_cell_values, int n_aux) {
    AuxField aux;
    aux.space = AuxSpace::cell_constant;
    aux.n_aux = n_aux;
    aux.values = std::move(per_cell_values);
    return aux;
}

AuxField make_nodal_aux(const Mesh& mesh, std::span<const double> global, int n_aux) {
    AuxField aux;
    aux.space = AuxSpace::nodal;
    aux.n_aux = n_aux;
    aux.values = gather_coefficients(mesh, FieldLayout{n_aux}, global);
    return aux;
}

void check_aux(const PhysicsForm& form, const AuxField* aux, std::size_t n_cells, int dim) {
    if (form.n_aux == 0) {
        if (aux != nullptr) throw ShapeError(form.name + " takes no auxiliary field");
        return;
    }
    if (aux == nullptr) throw MissingAuxiliaryError(form.name + " requires an auxiliary field");
    if (aux->n_aux != form.n_aux)
        throw ShapeError("auxiliary field has " + std::to_string(aux->n_aux) + " components, form expects " +
                         std::to_string(form.n_aux));
    if (aux->values.size() != n_cells * aux->per_cell(dim))
        throw ShapeError("auxiliary field has " + std::to_string(aux->values.size()) + " values, expected " +
                         std::to_string(n_cells * aux->per_cell(dim)));
}

void integrate_reference_cells(const Tabulation& tab, const QuadratureRule& rule, const CellGeometry& geom,
                               const PhysicsForm& form, std::span<const double> coeffs, const AuxField* aux,
                               std::size_t begin, std::size_t end, std::span<double> out) {
    const int d = tab.dim;
    const int nb = tab.n_b;
    const int nq = tab.n_q;
    const int ncomp = form.n_comp;
    const int naux = form.n_aux;
    const auto ud = static_cast<std::size_t>(d);
    const auto block = static_cast<std::size_t>(nb * ncomp);

    if (geom.dim != d || form.dim != d) throw DimensionError("tabulation, geometry and form dimensions disagree");
    if (rule.size() != static_cast<std::size_t>(nq)) throw ShapeError("quadrature rule does not match tabulation");
    if (coeffs.size() != geom.n_cells() * block)
        throw ShapeError("coefficient array has length " + std::to_string(coeffs.size()) + ", expected " +
                         std::to_string(geom.n_cells() * block));
    if (begin > end || end > geom.n_cells()) throw ShapeError("cell range out of bounds");
    if (out.size() != (end - begin) * block) throw ShapeError("output span does not match cell range");
    check_aux(form, aux, geom.n_cells(), d);

    // Per-cell scratch. tg = invJ^T D, the physical basis gradients.
    std::vector<double> tg(static_cast<std::size_t>(nq * nb) * ud);
    std::vector<double> u(static_cast<std::size_t>(ncomp)), grad_u(static_cast<std::size_t>(ncomp) * ud);
    std::vector<double> a(static_cast<std::size_t>(naux)), grad_a(static_cast<std::size_t>(naux) * ud);
    std::vector<double> f0v(static_cast<std::size_t>(nq * ncomp));
    std::vector<double> f1v(static_cast<std::size_t>(nq * ncomp) * ud);
    std::vector<double> f1(ud);

    for (std::size_t cell = begin; cell < end; ++cell) {
        const auto inv = geom.inv_jacobian(cell);
        const double det = geom.determinants[cell];
        const double* coeff = coeffs.data() + cell * block;

        for (int q = 0; q < nq; ++q) {
            for (int b = 0; b < nb; ++b)
                for (int k = 0; k < d; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < d; ++j)
                        acc += inv[static_cast<std::size_t>(j * d + k)] * tab.derivative(q, b, j);
                    tg[static_cast<std::size_t>((q * nb + b) * d + k)] = acc;
                }

            std::fill(u.begin(), u.end(), 0.0);
            std::fill(grad_u.begin(), grad_u.end(), 0.0);
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < ncomp; ++c) {
                    const double cf = coeff[b * ncomp + c];
                    u[static_cast<std::size_t>(c)] += cf * tab.value(q, b);
                    for (int k = 0; k < d; ++k)
                        grad_u[static_cast<std::size_t>(c * d + k)] += cf * tg[static_cast<std::size_t>((q * nb + b) * d + k)];
                }

            std::fill(a.begin(), a.end(), 0.0);
            std::fill(grad_a.begin(), grad_a.end(), 0.0);
            if (naux > 0) {
                const double* av = aux->values.data() + cell * aux->per_cell(d);
                if (aux->space == AuxSpace::cell_constant) {
                    for (int j = 0; j < naux; ++j) a[static_cast<std::size_t>(j)] = av[j];
                } else {
                    for (int b = 0; b < nb; ++b)
                        for (int j = 0; j < naux; ++j) {
                            const double cf = av[b * naux + j];
                            a[static_cast<std::size_t>(j)] += cf * tab.value(q, b);
                            for (int k = 0; k < d; ++k)
                                grad_a[static_cast<std::size_t>(j * d + k)] +=
                                    cf * tg[static_cast<std::size_t>((q * nb + b) * d + k)];
                        }
                }
            }

            const PointState<double> state{d, u, grad_u, a, grad_a};
            const double w = rule.weights[static_cast<std::size_t>(q)];
            for (int c = 0; c < ncomp; ++c) {
                if (form.has_f0) f0v[static_cast<std::size_t>(q * ncomp + c)] = form.f0(state, c) * det * w;
                form.f1(state, c, std::span<double>(f1));
                for (int k = 0; k < d; ++k)
                    f1v[static_cast<std::size_t>((q * ncomp + c) * d + k)] = f1[static_cast<std::size_t>(k)] * det * w;
            }
        }

        double* e = out.data() + (cell - begin) * block;
        for (int b = 0; b < nb; ++b)
            for (int c = 0; c < ncomp; ++c) {
                double acc = 0.0;
                for (int q = 0; q < nq; ++q) {
                    if (form.has_f0) acc += tab.value(q, b) * f0v[static_cast<std::size_t>(q * ncomp + c)];
                    for (int k = 0; k < d; ++k)
                        acc += tg[static_cast<std::size_t>((q * nb + b) * d + k)] *
                               f1v[static_cast<std::size_t>((q * ncomp + c) * d + k)];
                }
                e[b * ncomp + c] = acc;
            }
    }
}

std::vector<double> integrate_reference(const Tabulation& tab, const QuadratureRule& rule, const CellGeometry& geom,
                                        const PhysicsForm& form, std::span<const double> coeffs, const AuxField* aux) {
    std::vector<double> out(geom.n_cells() * static_cast<std::size_t>(tab.n_b * form.n_comp));
    integrate_reference_cells(tab, rule, geom, form, coeffs, aux, 0, geom.n_cells(), out);
    return out;
}

std::vector<double> assemble_residual(const Mesh& mesh, const FieldLayout& layout, std::span<const double> elem_vecs) {
    return scatter_add_element_vectors(mesh, layout, elem_vecs);
}

} // namespace transfem
