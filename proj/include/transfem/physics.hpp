#pragma once

#include <functional>
#include <span>
#include <string>

namespace transfem {

/// Field state at one quadrature point. grad_u is [comp][k], grad_a is [aux][k].
template <class T>
struct PointState {
    int dim = 2;
    std::span<const T> u;
    std::span<const T> grad_u;
    std::span<const T> a;
    std::span<const T> grad_a;
};

template <class T>
using F0Function = std::function<T(const PointState<T>&, int comp)>;
template <class T>
using F1Function = std::function<void(const PointState<T>&, int comp, std::span<T> out)>;

/// Pointwise weak form: integral of phi . f0 + grad(phi) : f1.
///
/// Native evaluators exist in both precisions; the source strings carry the
/// same functions in kernel dialect (realType / realVec) for code generation.
/// Flop counts use: every multiply/add/subtract is 1, copies and negations are 0.
struct PhysicsForm {
    std::string name;
    int dim = 2;
    int n_comp = 1;
    int n_aux = 0;
    bool has_f0 = false;

    F0Function<float> f0_f32;
    F0Function<double> f0_f64;
    F1Function<float> f1_f32;
    F1Function<double> f1_f64;

    int flops_f0 = 0;
    int flops_f1 = 0;

    std::string f0_name;
    std::string f1_name;
    std::string source_f0;
    std::string source_f1;

    template <class T>
    T f0(const PointState<T>& s, int comp) const {
        if (!has_f0) return T(0);
        if constexpr (std::is_same_v<T, float>) return f0_f32(s, comp);
        else return f0_f64(s, comp);
    }

    template <class T>
    void f1(const PointState<T>& s, int comp, std::span<T> out) const {
        if constexpr (std::is_same_v<T, float>) f1_f32(s, comp, out);
        else f1_f64(s, comp, out);
    }

    /// Binds one generic callable to both precisions.
    template <class G>
    void bind_f0(G g) {
        f0_f32 = g;
        f0_f64 = g;
    }
    template <class G>
    void bind_f1(G g) {
        f1_f32 = g;
        f1_f64 = g;
    }
};

/// f1 = grad u, f0 = 0.
PhysicsForm poisson_form(int dim);

/// f1 = a[0] * grad u; needs one auxiliary field.
PhysicsForm poisson_varcoef_form(int dim);

/// f1 row c = row c of the symmetric gradient 0.5 (grad u + grad u^T).
PhysicsForm elasticity_form(int dim);

/// f0 = u, f1 = grad u. Only used to exercise the f0 path.
PhysicsForm screened_poisson_form(int dim);

PhysicsForm make_form(const std::string& name, int dim);

} // namespace transfem
