#pragma once

#include "transfem/element.hpp"
#include "transfem/execution_geometry.hpp"
#include "transfem/mesh.hpp"
#include "transfem/physics.hpp"
#include "transfem/reference_integrator.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace transfem {

enum class Precision { f32, f64 };

constexpr std::size_t scalar_width(Precision p) { return p == Precision::f32 ? 4 : 8; }
const char* to_string(Precision p);
Precision parse_precision(const std::string& s);

/// Arithmetic performed by the virtual device, split by what it is charged to.
/// `model` is exactly the integration arithmetic of the closed-form flop model;
/// the other categories are reported but excluded from that comparison.
struct FlopCounts {
    std::uint64_t model = 0;      ///< field evaluation, weight scaling, basis reduction
    std::uint64_t replicated = 0; ///< other-component field evaluation repeated per component thread
    std::uint64_t f0 = 0;         ///< f0 scaling and accumulation
    std::uint64_t physics = 0;    ///< self-reported cost of the pointwise functions
    std::uint64_t aux = 0;        ///< auxiliary field interpolation

    std::uint64_t total() const { return model + replicated + f0 + physics + aux; }
    FlopCounts& operator+=(const FlopCounts& o);
    friend bool operator==(const FlopCounts&, const FlopCounts&) = default;
};

/// Shared-memory areas of one thread block, in scalars.
///
/// Geometry and coefficients have one staging slot per load thread (one per
/// cell and component). The tabulation is replicated per component; the basis
/// value rows are only resident when the form has an f0 term. Quadrature
/// points and weights are thread-private and not counted.
struct SharedMemoryImage {
    std::size_t tabulation = 0;
    std::size_t geometry = 0;
    std::size_t coefficients = 0;
    std::size_t f0_values = 0;
    std::size_t f1_values = 0;
    std::size_t aux = 0;
    std::size_t width = 4;

    /// Bytes covered by the closed-form shared-memory model.
    std::size_t model_bytes() const { return width * (tabulation + geometry + coefficients + f0_values + f1_values); }
    std::size_t total_bytes() const { return model_bytes() + width * aux; }
};

SharedMemoryImage shared_memory_image(const ExecutionGeometry& geom, bool has_f0, Precision precision,
                                      std::size_t aux_per_cell = 0);

struct BatchTrace {
    std::size_t chunk = 0;
    int batch = 0;
    FlopCounts flops;
    std::uint64_t bytes_loaded = 0; ///< model traffic: geometry, coefficients, f-values
    std::uint64_t aux_bytes = 0;
    int barriers = 0;
};

enum class Phase { quadrature, basis };

/// One task executed by one virtual thread. `step` is the sequential cell
/// index within the thread, so tasks sharing (batch, phase, step) run concurrently.
struct TaskRecord {
    Phase phase;
    int batch;
    int step;
    int thread;
    int cell;  ///< chunk-relative cell index
    int point; ///< quadrature point (quadrature phase) or basis function (basis phase)
    int comp;
};

struct VirtualDeviceTrace {
    std::vector<BatchTrace> batches;
    std::uint64_t tabulation_bytes = 0; ///< loaded once per chunk
    std::vector<TaskRecord> tasks;      ///< filled only when logging is enabled

    FlopCounts total_flops() const;
    std::uint64_t total_bytes() const;
    std::size_t barriers() const;
    void append(VirtualDeviceTrace&& other);
};

/// CSV: chunk,batch,flops,bytes_loaded,barriers (flops = model category).
void write_trace_csv(std::ostream& os, const VirtualDeviceTrace& trace);

struct ExecutorOptions {
    DeviceLimits limits;
    bool log_tasks = false;
    int jobs = 1; ///< host threads for distinct chunks
};

/// Device-resident inputs for one chunk (n_chunk cells), in device precision.
template <class T>
struct ChunkInput {
    std::span<const T> inv_jacobians;
    std::span<const T> determinants;
    std::span<const T> coefficients; ///< [cell][basis][comp]
    std::span<const T> aux;          ///< empty when the form has no auxiliary field
    AuxSpace aux_space = AuxSpace::cell_constant;
};

template <class T>
struct ChunkResult {
    std::vector<T> element_vectors; ///< [cell][basis][comp]
    VirtualDeviceTrace trace;
};

/// Runs one chunk through the two-phase schedule, one barrier per batch.
/// Throws CapacityError when the shared-memory image exceeds the device budget.
template <class T>
ChunkResult<T> execute_chunk(const ExecutionGeometry& geom, const Tabulation& tab, const QuadratureRule& rule,
                             const PhysicsForm& form, const ChunkInput<T>& input, std::size_t chunk_index,
                             const ExecutorOptions& options = {});

extern template ChunkResult<float> execute_chunk<float>(const ExecutionGeometry&, const Tabulation&,
                                                        const QuadratureRule&, const PhysicsForm&,
                                                        const ChunkInput<float>&, std::size_t,
                                                        const ExecutorOptions&);
extern template ChunkResult<double> execute_chunk<double>(const ExecutionGeometry&, const Tabulation&,
                                                          const QuadratureRule&, const PhysicsForm&,
                                                          const ChunkInput<double>&, std::size_t,
                                                          const ExecutorOptions&);

struct BlockingParams {
    int n_bl = 1;
    int n_cb = 1;
};

struct TransposedResult {
    ExecutionGeometry geometry;
    std::vector<double> element_vectors;
    std::vector<double> residual;
    VirtualDeviceTrace trace;
};

/// Whole-mesh residual: full chunks on the virtual device, remainder cells on
/// the reference path, then a deterministic scatter-add.
TransposedResult integrate_transposed(const Mesh& mesh, const CellGeometry& cell_geom, const FieldLayout& layout,
                                      const Tabulation& tab, const QuadratureRule& rule, const PhysicsForm& form,
                                      BlockingParams blocking, std::span<const double> global_coeffs,
                                      const AuxField* aux, Precision precision, const ExecutorOptions& options = {});

} // namespace transfem
