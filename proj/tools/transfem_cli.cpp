#include "transfem/error.hpp"
#include "transfem/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace transfem;

    CLI::App app{"Thread-transposed finite element residual evaluation on a virtual device"};
    RunConfig config;
    std::string mode = "check", real = "f32", field = "random", aux_space = "p0";
    std::size_t shared_kib = 48;

    app.add_option("--mode", mode, "check | bench | model | sweep | emit-kernel")
        ->check(CLI::IsMember({"check", "bench", "model", "sweep", "emit-kernel"}));
    app.add_option("--dim", config.dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
    app.add_option("--physics", config.physics, "poisson | poisson-varcoef | elasticity | screened-poisson")
        ->check(CLI::IsMember({"poisson", "poisson-varcoef", "elasticity", "screened-poisson"}));
    app.add_option("--refine", config.refine, "Mesh subdivisions per axis");
    app.add_option("--num-blocks", config.n_bl, "Concurrent blocks per batch (N_bl)");
    app.add_option("--num-batches", config.n_cb, "Batches per chunk (N_cb)");
    app.add_option("--real", real, "Scalar type: f32 | f64")->check(CLI::IsMember({"f32", "f64", "float", "double"}));
    app.add_option("--field", field, "Input field: random | affine | constant")
        ->check(CLI::IsMember({"random", "affine", "constant"}));
    app.add_option("--aux-space", aux_space, "Auxiliary coefficient space: p0 | p1")->check(CLI::IsMember({"p0", "p1"}));
    app.add_option("--seed", config.seed, "Seed for random fields");
    app.add_option("--jobs", config.jobs, "Host threads running distinct chunks");
    app.add_option("--repetitions", config.repetitions, "Timed repetitions in bench mode (at least 5)");
    app.add_option("--max-threads", config.limits.max_threads, "Device threads per thread block");
    app.add_option("--shared-memory-kib", shared_kib, "Device shared memory per thread block (KiB)");
    app.add_option("--output,-o", config.output, "CSV output (bench/model/sweep) or kernel file (emit-kernel)");
    app.add_option("--trace", config.trace_csv, "Per-batch trace CSV (check/bench)");
    app.add_option("--dump-mesh", config.mesh_dump, "Write the mesh in plain text");
    auto* emit = app.add_flag("--emit-kernel", "Shorthand for --mode emit-kernel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        config.mode = emit->count() ? Mode::emit_kernel : parse_mode(mode);
        config.scalar = parse_precision(real);
        config.field = parse_field_kind(field);
        config.aux_space = aux_space == "p0" ? AuxSpace::cell_constant : AuxSpace::nodal;
        config.limits.shared_memory_bytes = shared_kib * 1024;
    } catch (const Error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return run(config, std::cout, std::cerr);
}
