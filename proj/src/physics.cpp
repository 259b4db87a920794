#include "transfem/physics.hpp"

#include "transfem/error.hpp"

#include <sstream>

namespace transfem {

namespace {

void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw DimensionError("physics dimension must be 2 or 3, got " + std::to_string(dim));
}

void check_comp(int comp, int n_comp, const std::string& form) {
    if (comp < 0 || comp >= n_comp)
        throw IndexError(form + ": component " + std::to_string(comp) + " out of range [0, " + std::to_string(n_comp) +
                         ")");
}

constexpr const char* kAxes = "xyz";

std::string signature(const std::string& ret, const std::string& name) {
    return ret + " " + name + "(realType u[], realVec gradU[], realType a[], realVec gradA[], int comp)\n";
}

} // namespace

PhysicsForm poisson_form(int dim) {
    check_dim(dim);
    PhysicsForm form;
    form.name = "poisson";
    form.dim = dim;
    form.bind_f1([dim](const auto& s, int comp, auto out) {
        check_comp(comp, 1, "poisson");
        for (int k = 0; k < dim; ++k) out[static_cast<std::size_t>(k)] = s.grad_u[static_cast<std::size_t>(k)];
    });
    form.f1_name = "f1_laplacian";
    form.source_f1 = signature("realVec", form.f1_name) + "{\n  return gradU[comp];\n}\n";
    return form;
}

PhysicsForm poisson_varcoef_form(int dim) {
    check_dim(dim);
    PhysicsForm form;
    form.name = "poisson-varcoef";
    form.dim = dim;
    form.n_aux = 1;
    form.bind_f1([dim](const auto& s, int comp, auto out) {
        check_comp(comp, 1, "poisson-varcoef");
        if (s.a.empty()) throw MissingAuxiliaryError("poisson-varcoef: coefficient field a is required");
        for (int k = 0; k < dim; ++k)
            out[static_cast<std::size_t>(k)] = s.a[0] * s.grad_u[static_cast<std::size_t>(k)];
    });
    form.flops_f1 = dim;
    form.f1_name = "f1_varcoef_laplacian";
    form.source_f1 = signature("realVec", form.f1_name) + "{\n  return a[0]*gradU[comp];\n}\n";
    return form;
}

PhysicsForm elasticity_form(int dim) {
    check_dim(dim);
    PhysicsForm form;
    form.name = "elasticity";
    form.dim = dim;
    form.n_comp = dim;
    form.bind_f1([dim](const auto& s, int comp, auto out) {
        using T = std::remove_cvref_t<decltype(out[0])>;
        check_comp(comp, dim, "elasticity");
        const auto c = static_cast<std::size_t>(comp);
        const auto d = static_cast<std::size_t>(dim);
        for (std::size_t k = 0; k < d; ++k) out[k] = T(0.5) * (s.grad_u[c * d + k] + s.grad_u[k * d + c]);
    });
    form.flops_f1 = 2 * dim;
    form.f1_name = "f1_elasticity";

    std::ostringstream src;
    src << signature("realVec", form.f1_name) << "{\n  realVec f1;\n\n  switch(comp) {\n";
    for (int c = 0; c < dim; ++c) {
        src << "  case " << c << ":\n";
        for (int k = 0; k < dim; ++k)
            src << "    f1." << kAxes[k] << " = 0.5*(gradU[" << c << "]." << kAxes[k] << " + gradU[" << k << "]."
                << kAxes[c] << ");\n";
        if (c + 1 < dim) src << "    break;\n";
    }
    src << "  }\n  return f1;\n}\n";
    form.source_f1 = src.str();
    return form;
}

PhysicsForm screened_poisson_form(int dim) {
    PhysicsForm form = poisson_form(dim);
    form.name = "screened-poisson";
    form.has_f0 = true;
    form.bind_f0([](const auto& s, int comp) {
        check_comp(comp, 1, "screened-poisson");
        return s.u[0];
    });
    form.f0_name = "f0_screened";
    form.source_f0 = signature("realType", form.f0_name) + "{\n  return u[comp];\n}\n";
    return form;
}

PhysicsForm make_form(const std::string& name, int dim) {
    if (name == "poisson") return poisson_form(dim);
    if (name == "poisson-varcoef") return poisson_varcoef_form(dim);
    if (name == "elasticity") return elasticity_form(dim);
    if (name == "screened-poisson") return screened_poisson_form(dim);
    throw ConfigurationError("unknown physics '" + name + "'");
}

} // namespace transfem
