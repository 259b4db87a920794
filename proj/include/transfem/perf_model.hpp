#pragma once

#include "transfem/execution_geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace transfem {

/// Non-negative rational in lowest terms.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational make(std::uint64_t num, std::uint64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

std::string to_string(const Rational& r);

struct SharedMemoryEstimate {
    std::uint64_t block_bytes = 0; ///< M
    double per_cell_bytes = 0.0;   ///< M_c = M / N_bc
};

struct TrafficEstimate {
    std::uint64_t bytes_per_batch = 0;
    std::uint64_t flops_per_batch = 0;
};

struct PerfEstimate {
    ExecutionGeometry geometry;
    std::size_t scalar_width = 4;
    std::uint64_t shared_bytes_block = 0;
    double shared_bytes_per_cell = 0.0;
    std::uint64_t bytes_per_batch = 0;
    std::uint64_t flops_per_batch = 0;
    Rational balance;           ///< at this scalar width
    Rational balance_single;    ///< always 4-byte scalars
    std::uint64_t occupancy_hint = 0; ///< resident thread blocks per shared-memory budget
};

/// Upper bound on shared memory per thread block. Without f0 the basis-value
/// rows and f0 values are dropped.
SharedMemoryEstimate shared_memory_bytes(const ExecutionGeometry& g, std::size_t scalar_width, bool needs_f0);

/// Memory loaded and integration flops per cell batch.
TrafficEstimate traffic_and_flops(const ExecutionGeometry& g, std::size_t scalar_width);

/// Flops per byte with 4-byte scalars.
Rational balance(const ExecutionGeometry& g);
Rational balance(const ExecutionGeometry& g, std::size_t scalar_width);

/// GFLOP/s ceiling for a bandwidth-bound kernel: balance (flop/byte) * bandwidth (GB/s).
double predict_bandwidth_bound(double beta, double achievable_bw_gbs);

PerfEstimate estimate(const ExecutionGeometry& g, std::size_t scalar_width, bool needs_f0,
                      std::size_t shared_memory_cap = 48 * 1024);

void write_model_report(std::ostream& os, const PerfEstimate& est);
void write_model_csv_header(std::ostream& os);
void write_model_csv_row(std::ostream& os, const PerfEstimate& est);

} // namespace transfem
