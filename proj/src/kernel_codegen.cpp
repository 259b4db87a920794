#include "transfem/kernel_codegen.hpp"

#include "transfem/error.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <vector>

namespace transfem {

namespace {

std::string literal(double v, Precision p) {
    std::ostringstream os;
    if (p == Precision::f32) {
        os << std::setprecision(9) << static_cast<float>(v);
        std::string s = os.str();
        if (s.find_first_of(".e") == std::string::npos) s += ".0";
        return s + "f";
    }
    os << std::setprecision(17) << v;
    std::string s = os.str();
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

template <class Values>
std::string initializer(const Values& values, Precision p) {
    std::string s = "{";
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + literal(values[i], p);
    return s + "}";
}

// invJ^T applied to a reference gradient, written out per component.
std::string pullback_function(int dim) {
    std::ostringstream os;
    os << "realVec pullback(__local const realType *invJ, __local const realType *der)\n{\n  return (realVec)(";
    for (int k = 0; k < dim; ++k) {
        if (k) os << ",\n                   ";
        for (int j = 0; j < dim; ++j) os << (j ? " + " : "") << "invJ[" << j * dim + k << "]*der[" << j << "]";
    }
    os << ");\n}\n";
    return os.str();
}

} // namespace

KernelSource generate_kernel_source(const ExecutionGeometry& g, const PhysicsForm& form, Precision scalar,
                                    const QuadratureRule& rule, const Tabulation& tab) {
    if (form.source_f1.empty() || form.f1_name.empty())
        throw CodegenError(form.name + ": f1 source string is missing");
    if (form.has_f0 && (form.source_f0.empty() || form.f0_name.empty()))
        throw CodegenError(form.name + ": f0 source string is missing");
    if (form.dim != g.dim || form.n_comp != g.n_comp) throw CodegenError("form does not match execution geometry");
    if (tab.n_b != g.n_b || tab.n_q != g.n_q || rule.size() != static_cast<std::size_t>(g.n_q))
        throw CodegenError("tabulation does not match execution geometry");

    const bool f0 = form.has_f0;
    const int d = g.dim;
    const std::string real = scalar == Precision::f32 ? "float" : "double";

    KernelSource ks;
    ks.entry_name = "integrateElementQuadrature";
    ks.specialization = {g.dim, g.n_b, g.n_comp, g.n_q, g.n_bl, g.n_cb, real};

    std::ostringstream os;
    os << "/* Residual integration kernel for '" << form.name << "'\n"
       << " * dim=" << d << " N_b=" << g.n_b << " N_comp=" << g.n_comp << " N_q=" << g.n_q << " N_bl=" << g.n_bl
       << " N_cb=" << g.n_cb << " realType=" << real << "\n"
       << " * Quadrature phase and basis phase exchange values through local memory.\n"
       << " */\n";
    if (scalar == Precision::f64) os << "#pragma OPENCL EXTENSION cl_khr_fp64 : enable\n";
    os << "#define realType " << real << "\n"
       << "#define realVec  " << real << d << "\n\n"
       << "#define dim    " << d << "  /* Spatial dimensions */\n"
       << "#define N_b    " << g.n_b << "  /* Basis functions */\n"
       << "#define N_comp " << g.n_comp << "  /* Basis function components */\n"
       << "#define N_q    " << g.n_q << "  /* Quadrature points */\n"
       << "#define N_aux  " << std::max(form.n_aux, 1) << "  /* Auxiliary fields (P0) */\n"
       << "#define N_bl   " << g.n_bl << "  /* Concurrent blocks */\n"
       << "#define N_cb   " << g.n_cb << "  /* Serial cell batches */\n"
       << "#define N_bt   " << g.n_bt << "  /* Total scalar basis funcs */\n"
       << "#define N_bs   " << g.n_bs << "  /* Cells per block */\n"
       << "#define N_bc   " << g.n_bc << "  /* Cells per batch */\n"
       << "#define N_t    " << g.n_t << "  /* Threads */\n"
       << "#define N_tq   " << g.n_tq << "  /* Quadrature threads per cell */\n"
       << "#define N_sqc  " << g.n_sqc << "  /* Serial quad cells */\n"
       << "#define N_sbc  " << g.n_sbc << "  /* Serial basis cells */\n\n";

    if (f0) os << form.source_f0 << '\n';
    os << form.source_f1 << '\n' << pullback_function(d) << '\n';

    os << "__kernel void " << ks.entry_name << "(__global const realType *coefficients,\n"
       << "    __global const realType *jacobianInverses, __global const realType *jacobianDeterminants,\n";
    if (form.n_aux > 0) os << "    __global const realType *auxiliary,\n";
    os << "    __global realType *elemVec)\n{\n";

    std::vector<double> der;
    for (int q = 0; q < g.n_q; ++q)
        for (int b = 0; b < g.n_b; ++b)
            for (int k = 0; k < d; ++k) der.push_back(tab.derivative(q, b, k));
    os << "  const realType weights_0[N_q] = " << initializer(rule.weights, scalar) << ";\n"
       << "  const realType Basis_0[N_q*N_b] = " << initializer(tab.basis, scalar) << ";\n"
       << "  const realType BasisDerivatives_0[N_q*N_b*dim] = " << initializer(der, scalar) << ";\n\n";

    os << "  const int t          = get_local_id(0);\n"
       << "  const int block      = t / (N_bs*N_comp);\n"
       << "  const int r          = t % (N_bs*N_comp);\n"
       << "  const int comp       = r % N_comp;\n"
       << "  const int qSlot      = r / N_tq;           /* cell slot, quadrature phase */\n"
       << "  const int q          = (r % N_tq) / N_comp;\n"
       << "  const int bSlot      = r / N_bt;           /* cell slot, basis phase */\n"
       << "  const int b          = (r % N_bt) / N_comp;\n"
       << "  const int cellOffset = get_group_id(0)*N_cb*N_bc;\n\n";

    if (f0) os << "  __local realType phi_i[N_q*N_bt];\n";
    os << "  __local realType phiDer_i[N_q*N_bt*dim];\n"
       << "  __local realType invJ_i[N_t*dim*dim];\n"
       << "  __local realType detJ_i[N_t];\n"
       << "  __local realType u_i[N_t*N_bt];\n";
    if (form.n_aux > 0) os << "  __local realType a_i[N_bc*N_aux];\n";
    if (f0) os << "  __local realType f_0[N_t*N_sqc];\n";
    os << "  __local realVec  f_1[N_t*N_sqc];\n\n";

    os << "  /* Load quadrature weights */\n"
       << "  const realType w = weights_0[q];\n"
       << "  /* Load basis tabulation phi_i for this cell */\n"
       << "  if (t < N_q*N_bt) {\n"
       << "    const int tq = t / N_bt;\n"
       << "    const int tb = (t % N_bt) / N_comp;\n";
    if (f0) os << "    phi_i[t] = Basis_0[tq*N_b + tb];\n";
    os << "    for (int k = 0; k < dim; ++k) phiDer_i[t*dim + k] = BasisDerivatives_0[(tq*N_b + tb)*dim + k];\n"
       << "  }\n\n";

    os << "  for (int batch = 0; batch < " << g.n_cb << "; ++batch) {\n"
       << "    const int batchOffset = cellOffset + batch*N_bc;\n"
       << "    const int loadCell    = batchOffset + t/N_comp;\n"
       << "    /* Load geometry */\n"
       << "    detJ_i[t] = jacobianDeterminants[loadCell];\n"
       << "    for (int i = 0; i < dim*dim; ++i) invJ_i[t*dim*dim + i] = jacobianInverses[loadCell*dim*dim + i];\n"
       << "    /* Load coefficients u_i for this cell */\n"
       << "    for (int i = 0; i < N_bt; ++i) u_i[t*N_bt + i] = coefficients[loadCell*N_bt + i];\n";
    if (form.n_aux > 0)
        os << "    if (comp == 0) for (int j = 0; j < N_aux; ++j) a_i[(t/N_comp)*N_aux + j] = auxiliary[loadCell*N_aux + j];\n";
    os << '\n';

    os << "    /* Map coefficients to values at quadrature points */\n"
       << "    for (int c = 0; c < " << g.n_sqc << "; ++c) {\n"
       << "      const int cell = block*N_bs + c*N_b + qSlot;\n"
       << "      const int slot = cell*N_comp + comp;\n"
       << "      const int fpos = (cell*N_q + q)*N_comp + comp;\n"
       << "      realType u[N_comp];     /* u(x_q), value of the field at x_q */\n"
       << "      realVec  gradU[N_comp]; /* du/dx(x_q), value of the gradient at x_q */\n"
       << "      realType a[N_aux];\n"
       << "      realVec  gradA[N_aux];\n"
       << "      for (int fc = 0; fc < N_comp; ++fc) { u[fc] = 0.0; gradU[fc] = (realVec)(0.0); }\n";
    if (form.n_aux > 0)
        os << "      for (int j = 0; j < N_aux; ++j) { a[j] = a_i[cell*N_aux + j]; gradA[j] = (realVec)(0.0); }\n";
    else
        os << "      for (int j = 0; j < N_aux; ++j) { a[j] = 0.0; gradA[j] = (realVec)(0.0); }\n";
    os << "      /* Get field and derivatives at this quadrature point */\n"
       << "      for (int i = 0; i < N_b; ++i) {\n"
       << "        for (int fc = 0; fc < N_comp; ++fc) {\n"
       << "          const realType coef = u_i[slot*N_bt + i*N_comp + fc];\n"
       << "          u[fc]     += coef*Basis_0[q*N_b + i];\n"
       << "          gradU[fc] += coef*pullback(&invJ_i[slot*dim*dim], &phiDer_i[(q*N_bt + i*N_comp + comp)*dim]);\n"
       << "        }\n"
       << "      }\n"
       << "      /* Process values at quadrature points */\n";
    if (f0) os << "      f_0[fpos] = " << form.f0_name << "(u, gradU, a, gradA, comp)*detJ_i[slot]*w;\n";
    os << "      f_1[fpos] = " << form.f1_name << "(u, gradU, a, gradA, comp)*detJ_i[slot]*w;\n"
       << "    }\n\n";

    os << "    /* ==== TRANSPOSE THREADS ==== */\n"
       << "    barrier(CLK_LOCAL_MEM_FENCE);\n\n";

    os << "    /* Map values at quadrature points to coefficients */\n"
       << "    for (int c = 0; c < " << g.n_sbc << "; ++c) {\n"
       << "      const int cell = block*N_bs + c*N_q + bSlot;\n"
       << "      const int slot = cell*N_comp + comp;\n"
       << "      realType e_i = 0.0;\n"
       << "      for (int qq = 0; qq < N_q; ++qq) {\n"
       << "        const int fpos = (cell*N_q + qq)*N_comp + comp;\n"
       << "        const int row  = qq*N_bt + b*N_comp + comp;\n";
    if (f0) os << "        e_i += phi_i[row]*f_0[fpos];\n";
    os << "        e_i += dot(pullback(&invJ_i[slot*dim*dim], &phiDer_i[row*dim]), f_1[fpos]);\n"
       << "      }\n"
       << "      /* Write element vector for N_bl*N_q cells at a time */\n"
       << "      elemVec[(batchOffset + cell)*N_bt + b*N_comp + comp] = e_i;\n"
       << "    }\n"
       << "  }\n"
       << "}\n";

    ks.text = os.str();
    return ks;
}

KernelSource generate_kernel_source(const ExecutionGeometry& geom, const PhysicsForm& form, Precision scalar) {
    QuadratureRule rule;
    if (geom.n_q == 1) rule = quadrature_rule(geom.dim, 1);
    else if (geom.n_q == 2) rule = duplicated_midpoint_rule(geom.dim);
    else throw CodegenError("no built-in quadrature rule with " + std::to_string(geom.n_q) + " points");
    return generate_kernel_source(geom, form, scalar, rule, tabulate(geom.dim, rule));
}

} // namespace transfem
