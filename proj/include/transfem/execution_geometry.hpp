#pragma once

#include <cstddef>

namespace transfem {

/// Limits of the simulated device.
struct DeviceLimits {
    int max_threads = 1024;
    std::size_t shared_memory_bytes = 48 * 1024;
};

struct GeometryParams {
    int dim = 2;
    int n_b = 3;    ///< scalar basis functions per cell
    int n_comp = 1; ///< field components
    int n_q = 1;    ///< quadrature points
    int n_bl = 1;   ///< concurrent blocks per batch
    int n_cb = 1;   ///< batches per chunk
};

/// Chunk / batch / block decomposition of a mesh for the transposed schedule.
///
/// A block holds n_b * n_q cells. A batch holds n_bl blocks and is run by
/// n_t = n_bc * n_comp threads. In the quadrature phase each thread walks
/// n_sqc = n_q cells; in the basis phase it walks n_sbc = n_b cells. A chunk is
/// n_cb batches processed one after another by one thread block.
struct ExecutionGeometry {
    int dim = 2;
    int n_b = 0;
    int n_comp = 0;
    int n_q = 0;
    int n_bt = 0;
    int n_bs = 0;
    int n_bl = 0;
    int n_bc = 0;
    int n_cb = 0;
    int n_chunk = 0;
    int n_t = 0;
    int n_tq = 0;
    int n_sqc = 0;
    int n_sbc = 0;
    int n_cbc = 0;
    std::size_t n_cells = 0;
    std::size_t n_chunks = 0;
    std::size_t n_r = 0;

    GeometryParams params() const { return {dim, n_b, n_comp, n_q, n_bl, n_cb}; }
};

/// Throws ConfigurationError for non-positive sizes or n_t above limits.max_threads.
ExecutionGeometry derive_execution_geometry(const GeometryParams& params, std::size_t n_cells,
                                            const DeviceLimits& limits = {});

} // namespace transfem
