#pragma once

#include "transfem/mesh.hpp"
#include "transfem/transpose_executor.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace transfem {

enum class Mode { check, bench, model, sweep, emit_kernel };

Mode parse_mode(const std::string& s);
const char* to_string(Mode m);

enum class FieldKind { random, affine, constant };

FieldKind parse_field_kind(const std::string& s);

/// Deterministic global vector. random: uniform in [-1, 1]; affine:
/// (2x + 3y - z + 1) * (comp + 1); constant: 1.
std::vector<double> seeded_field(const Mesh& mesh, const FieldLayout& layout, FieldKind kind, std::uint64_t seed);

struct RunConfig {
    int dim = 2;
    std::string physics = "poisson";
    int refine = 16;
    int n_bl = 16;
    int n_cb = 8;
    Precision scalar = Precision::f32;
    Mode mode = Mode::check;
    std::string output;    ///< CSV (sweep, bench, model) or kernel text (emit-kernel); empty = none/stdout
    std::string trace_csv; ///< optional per-batch trace export
    std::string mesh_dump; ///< optional plain-text mesh dump
    FieldKind field = FieldKind::random;
    AuxSpace aux_space = AuxSpace::cell_constant;
    std::uint64_t seed = 1;
    int jobs = 1;
    int repetitions = 5;
    DeviceLimits limits;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Relative tolerance of check mode for a precision.
double check_tolerance(Precision p);

/// ||a - b||_inf / ||b||_inf (absolute difference when b is zero).
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b);

/// Outcome of one oracle comparison.
struct CheckResult {
    std::size_t n_cells = 0;
    std::size_t n_unknowns = 0;
    double max_rel_err = 0.0;
    bool passed = false;
    TransposedResult transposed;
    std::vector<double> reference_residual;
};

/// Builds the problem described by config and compares the transposed
/// residual against the reference residual.
CheckResult run_check(const RunConfig& config);

/// Validates the configuration, then runs the selected mode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Blocking grid of sweep mode.
inline const std::vector<int> kSweepBlocks{16, 20, 24, 28, 32, 36};
inline const std::vector<int> kSweepBatches{4, 8, 12, 16};

} // namespace transfem
