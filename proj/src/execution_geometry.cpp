#include "transfem/execution_geometry.hpp"

#include "transfem/error.hpp"

#include <string>

namespace transfem {

ExecutionGeometry derive_execution_geometry(const GeometryParams& p, std::size_t n_cells, const DeviceLimits& limits) {
    if (p.dim != 2 && p.dim != 3) throw ConfigurationError("dimension must be 2 or 3, got " + std::to_string(p.dim));
    auto positive = [](int v, const char* what) {
        if (v < 1) throw ConfigurationError(std::string(what) + " must be >= 1, got " + std::to_string(v));
    };
    positive(p.n_b, "number of basis functions");
    positive(p.n_comp, "number of components");
    positive(p.n_q, "number of quadrature points");
    positive(p.n_bl, "blocks per batch");
    positive(p.n_cb, "batches per chunk");

    ExecutionGeometry g;
    g.dim = p.dim;
    g.n_b = p.n_b;
    g.n_comp = p.n_comp;
    g.n_q = p.n_q;
    g.n_bl = p.n_bl;
    g.n_cb = p.n_cb;
    g.n_bt = p.n_b * p.n_comp;
    g.n_bs = p.n_b * p.n_q;
    g.n_bc = g.n_bs * g.n_bl;
    g.n_chunk = g.n_cb * g.n_bc;
    g.n_t = g.n_bc * g.n_comp;
    g.n_tq = g.n_q * g.n_comp;
    g.n_sqc = g.n_q;
    g.n_sbc = g.n_b;
    g.n_cbc = g.n_bl * g.n_q;

    if (g.n_t > limits.max_threads)
        throw ConfigurationError("thread block needs " + std::to_string(g.n_t) + " threads (n_bs=" +
                                 std::to_string(g.n_bs) + ", n_comp=" + std::to_string(g.n_comp) +
                                 ", n_bl=" + std::to_string(g.n_bl) + "), device limit is " +
                                 std::to_string(limits.max_threads));

    g.n_cells = n_cells;
    g.n_chunks = n_cells / static_cast<std::size_t>(g.n_chunk);
    g.n_r = n_cells % static_cast<std::size_t>(g.n_chunk);
    return g;
}

} // namespace transfem
