#include "transfem/run.hpp"

#include "transfem/element.hpp"
#include "transfem/error.hpp"
#include "transfem/kernel_codegen.hpp"
#include "transfem/perf_model.hpp"
#include "transfem/physics.hpp"
#include "transfem/reference_integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>

namespace transfem {

Mode parse_mode(const std::string& s) {
    if (s == "check") return Mode::check;
    if (s == "bench") return Mode::bench;
    if (s == "model") return Mode::model;
    if (s == "sweep") return Mode::sweep;
    if (s == "emit-kernel") return Mode::emit_kernel;
    throw ConfigurationError("unknown mode '" + s + "'");
}

const char* to_string(Mode m) {
    switch (m) {
    case Mode::check: return "check";
    case Mode::bench: return "bench";
    case Mode::model: return "model";
    case Mode::sweep: return "sweep";
    case Mode::emit_kernel: return "emit-kernel";
    }
    return "?";
}

FieldKind parse_field_kind(const std::string& s) {
    if (s == "random") return FieldKind::random;
    if (s == "affine") return FieldKind::affine;
    if (s == "constant") return FieldKind::constant;
    throw ConfigurationError("unknown field kind '" + s + "'");
}

std::vector<double> seeded_field(const Mesh& mesh, const FieldLayout& layout, FieldKind kind, std::uint64_t seed) {
    std::vector<double> out(layout.global_size(mesh));
    const auto nc = static_cast<std::size_t>(layout.n_comp);
    switch (kind) {
    case FieldKind::constant:
        std::fill(out.begin(), out.end(), 1.0);
        break;
    case FieldKind::affine:
        for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
            const auto x = mesh.vertex(v);
            double base = 2.0 * x[0] + 3.0 * x[1] + 1.0;
            if (mesh.dim == 3) base -= x[2];
            for (std::size_t c = 0; c < nc; ++c) out[v * nc + c] = base * static_cast<double>(c + 1);
        }
        break;
    case FieldKind::random: {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& x : out) x = dist(rng);
        break;
    }
    }
    return out;
}

double check_tolerance(Precision p) { return p == Precision::f32 ? 1e-5 : 1e-11; }

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("residual vectors differ in length");
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

namespace {

struct Problem {
    Mesh mesh;
    CellGeometry geom;
    FieldLayout layout;
    QuadratureRule rule;
    Tabulation tab;
    PhysicsForm form;
    std::vector<double> coeffs;
    std::optional<AuxField> aux;

    const AuxField* aux_ptr() const { return aux ? &*aux : nullptr; }
};

void validate(const RunConfig& c) {
    if (c.dim != 2 && c.dim != 3) throw ConfigurationError("--dim must be 2 or 3");
    if (c.refine < 1) throw ConfigurationError("--refine must be >= 1");
    if (c.jobs < 1) throw ConfigurationError("--jobs must be >= 1");
    if (c.repetitions < 1) throw ConfigurationError("--repetitions must be >= 1");
    if (c.physics != "poisson" && c.physics != "poisson-varcoef" && c.physics != "elasticity" &&
        c.physics != "screened-poisson")
        throw ConfigurationError("unknown physics '" + c.physics + "'");
}

Problem build_problem(const RunConfig& c) {
    Problem p;
    p.mesh = generate_unit_simplex_mesh(c.dim, c.refine);
    p.geom = compute_geometry(p.mesh);
    p.form = make_form(c.physics, c.dim);
    p.layout = FieldLayout{p.form.n_comp};
    p.rule = quadrature_rule(c.dim, 1);
    p.tab = tabulate(c.dim, p.rule);
    p.coeffs = seeded_field(p.mesh, p.layout, c.field, c.seed);
    if (p.form.n_aux > 0) {
        // Coefficient field in [0.5, 1.5], seeded independently of u.
        std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> dist(0.5, 1.5);
        if (c.aux_space == AuxSpace::cell_constant) {
            std::vector<double> vals(p.mesh.n_cells() * static_cast<std::size_t>(p.form.n_aux));
            for (auto& v : vals) v = dist(rng);
            p.aux = make_cell_constant_aux(std::move(vals), p.form.n_aux);
        } else {
            std::vector<double> vals(p.mesh.n_vertices() * static_cast<std::size_t>(p.form.n_aux));
            for (auto& v : vals) v = dist(rng);
            p.aux = make_nodal_aux(p.mesh, vals, p.form.n_aux);
        }
    }
    if (!c.mesh_dump.empty()) {
        std::ofstream os(c.mesh_dump);
        if (!os) throw ConfigurationError("cannot write mesh dump '" + c.mesh_dump + "'");
        write_mesh(os, p.mesh);
    }
    return p;
}

ExecutionGeometry checked_geometry(const Problem& p, const RunConfig& c) {
    const ExecutionGeometry g = derive_execution_geometry(
        {c.dim, p.tab.n_b, p.form.n_comp, p.tab.n_q, c.n_bl, c.n_cb}, p.mesh.n_cells(), c.limits);
    const auto img = shared_memory_image(g, p.form.has_f0, c.scalar, p.aux ? p.aux->per_cell(c.dim) : 0);
    if (img.total_bytes() > c.limits.shared_memory_bytes)
        throw CapacityError(img.total_bytes(), c.limits.shared_memory_bytes);
    return g;
}

std::vector<double> reference_residual(const Problem& p) {
    const auto elem = integrate_reference(p.tab, p.rule, p.geom, p.form, gather_coefficients(p.mesh, p.layout, p.coeffs),
                                          p.aux_ptr());
    return assemble_residual(p.mesh, p.layout, elem);
}

TransposedResult transposed(const Problem& p, const RunConfig& c) {
    ExecutorOptions opts;
    opts.limits = c.limits;
    opts.jobs = c.jobs;
    return integrate_transposed(p.mesh, p.geom, p.layout, p.tab, p.rule, p.form, {c.n_bl, c.n_cb}, p.coeffs,
                                p.aux_ptr(), c.scalar, opts);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigurationError("cannot open output file '" + path + "'");
    return os;
}

void write_trace(const RunConfig& c, const VirtualDeviceTrace& trace) {
    if (c.trace_csv.empty()) return;
    auto os = open_output(c.trace_csv);
    write_trace_csv(os, trace);
}

struct Row {
    int n_bl, n_cb;
    std::size_t n_cells;
    double max_rel_err;
    std::uint64_t model_flops, bytes;
    double beta, wall_ms, mflops_rate;
    bool passed;
};

void write_csv_header(std::ostream& os) {
    os << "dim,physics,scalar,n_bl,n_cb,n_cells,max_rel_err,model_flops,bytes,beta,wall_ms,mflops_rate\n";
}

void write_csv_row(std::ostream& os, const RunConfig& c, const Row& r) {
    os << c.dim << ',' << c.physics << ',' << to_string(c.scalar) << ',' << r.n_bl << ',' << r.n_cb << ',' << r.n_cells
       << ',' << std::setprecision(6) << std::scientific << r.max_rel_err << std::defaultfloat << ',' << r.model_flops
       << ',' << r.bytes << ',' << std::setprecision(10) << r.beta << ',' << std::setprecision(6) << r.wall_ms << ','
       << r.mflops_rate << '\n';
}

// Model flops/bytes for the cells that ran on the virtual device.
std::pair<std::uint64_t, std::uint64_t> model_totals(const ExecutionGeometry& g, Precision s) {
    const auto tf = traffic_and_flops(g, scalar_width(s));
    const std::uint64_t batches = g.n_chunks * static_cast<std::uint64_t>(g.n_cb);
    return {tf.flops_per_batch * batches, tf.bytes_per_batch * batches};
}

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int mode_check(const RunConfig& c, std::ostream& out) {
    const CheckResult r = run_check(c);
    write_trace(c, r.transposed.trace);
    const auto& g = r.transposed.geometry;
    out << "check " << c.physics << " dim=" << c.dim << " real=" << to_string(c.scalar) << " refine=" << c.refine
        << " n_bl=" << c.n_bl << " n_cb=" << c.n_cb << " jobs=" << c.jobs << '\n'
        << "  cells=" << r.n_cells << " unknowns=" << r.n_unknowns << " chunks=" << g.n_chunks << " (x" << g.n_chunk
        << ") remainder=" << g.n_r << '\n'
        << "  max relative error " << std::scientific << std::setprecision(3) << r.max_rel_err << std::defaultfloat
        << " (tolerance " << check_tolerance(c.scalar) << "): " << (r.passed ? "PASS" : "FAIL") << '\n';
    return r.passed ? kExitOk : kExitCheckFailed;
}

int mode_bench(const RunConfig& c, std::ostream& out) {
    const Problem p = build_problem(c);
    const ExecutionGeometry g = checked_geometry(p, c);
    const auto ref = reference_residual(p);
    const int reps = std::max(5, c.repetitions);

    TransposedResult last;
    std::vector<double> times;
    for (int i = 0; i < reps; ++i) times.push_back(time_ms([&] { last = transposed(p, c); }));
    write_trace(c, last.trace);

    const auto [flops, bytes] = model_totals(g, c.scalar);
    const double wall = median(times);
    const double err = max_relative_error(last.residual, ref);
    const bool ok = err <= check_tolerance(c.scalar);
    out << "# virtual-device timings: schedule simulated on the host CPU; rates are not comparable to GPU hardware\n"
        << "bench " << c.physics << " dim=" << c.dim << " real=" << to_string(c.scalar) << " cells=" << p.mesh.n_cells()
        << " n_bl=" << c.n_bl << " n_cb=" << c.n_cb << " jobs=" << c.jobs << " repetitions=" << reps << '\n'
        << "  median wall time " << std::fixed << std::setprecision(3) << wall << " ms\n"
        << std::defaultfloat << "  model flops " << flops << ", model bytes " << bytes << '\n'
        << "  model flop rate " << std::setprecision(6) << (wall > 0 ? flops / (wall * 1e3) : 0.0) << " MFLOP/s\n"
        << "  max relative error " << std::scientific << std::setprecision(3) << err << std::defaultfloat << ": "
        << (ok ? "PASS" : "FAIL") << '\n';
    if (!c.output.empty()) {
        auto os = open_output(c.output);
        write_csv_header(os);
        write_csv_row(os, c,
                      {c.n_bl, c.n_cb, p.mesh.n_cells(), err, flops, bytes, balance(g, scalar_width(c.scalar)).value(),
                       wall, wall > 0 ? flops / (wall * 1e3) : 0.0, ok});
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int mode_model(const RunConfig& c, std::ostream& out) {
    const PhysicsForm form = make_form(c.physics, c.dim);
    const ExecutionGeometry g =
        derive_execution_geometry({c.dim, c.dim + 1, form.n_comp, 1, c.n_bl, c.n_cb}, 0, c.limits);
    const PerfEstimate est = estimate(g, scalar_width(c.scalar), form.has_f0, c.limits.shared_memory_bytes);
    out << "model " << c.physics << " dim=" << c.dim << " real=" << to_string(c.scalar) << '\n';
    write_model_report(out, est);
    if (!c.output.empty()) {
        auto os = open_output(c.output);
        write_model_csv_header(os);
        write_model_csv_row(os, est);
    }
    return kExitOk;
}

int mode_sweep(const RunConfig& c, std::ostream& out) {
    const Problem p = build_problem(c);
    const auto ref = reference_residual(p);

    std::vector<std::pair<RunConfig, Row>> rows;
    bool all_ok = true;
    for (int nbl : kSweepBlocks)
        for (int ncb : kSweepBatches) {
            RunConfig rc = c;
            rc.n_bl = nbl;
            rc.n_cb = ncb;
            const ExecutionGeometry g = checked_geometry(p, rc);
            TransposedResult res;
            const double wall = time_ms([&] { res = transposed(p, rc); });
            const double err = max_relative_error(res.residual, ref);
            const bool ok = err <= check_tolerance(c.scalar);
            all_ok = all_ok && ok;
            const auto [flops, bytes] = model_totals(g, c.scalar);
            rows.emplace_back(rc, Row{nbl, ncb, p.mesh.n_cells(), err, flops, bytes,
                                      balance(g, scalar_width(c.scalar)).value(), wall,
                                      wall > 0 ? flops / (wall * 1e3) : 0.0, ok});
        }

    out << "# virtual-device timings: schedule simulated on the host CPU; rates are not comparable to GPU hardware\n"
        << "sweep " << c.physics << " dim=" << c.dim << " real=" << to_string(c.scalar) << " cells=" << p.mesh.n_cells()
        << " unknowns=" << p.coeffs.size() << '\n'
        << "  max relative error by blocks/batch (rows) and batches/chunk (columns)\n"
        << "  n_bl ";
    for (int ncb : kSweepBatches) out << std::setw(12) << ncb;
    out << '\n';
    std::size_t i = 0;
    for (int nbl : kSweepBlocks) {
        out << "  " << std::setw(4) << nbl << ' ';
        for (std::size_t j = 0; j < kSweepBatches.size(); ++j, ++i)
            out << std::setw(12) << std::scientific << std::setprecision(2) << rows[i].second.max_rel_err
                << (rows[i].second.passed ? ' ' : '!');
        out << std::defaultfloat << '\n';
    }
    out << "  " << (all_ok ? "all configurations PASS" : "some configurations FAIL") << '\n';

    auto emit = [&](std::ostream& os) {
        write_csv_header(os);
        for (const auto& [rc, row] : rows) write_csv_row(os, rc, row);
    };
    if (c.output.empty()) {
        emit(out);
    } else {
        auto os = open_output(c.output);
        emit(os);
    }
    return all_ok ? kExitOk : kExitCheckFailed;
}

int mode_emit_kernel(const RunConfig& c, std::ostream& out) {
    const PhysicsForm form = make_form(c.physics, c.dim);
    const ExecutionGeometry g =
        derive_execution_geometry({c.dim, c.dim + 1, form.n_comp, 1, c.n_bl, c.n_cb}, 0, c.limits);
    const KernelSource ks = generate_kernel_source(g, form, c.scalar);
    if (c.output.empty()) {
        out << ks.text;
    } else {
        auto os = open_output(c.output);
        os << ks.text;
    }
    return kExitOk;
}

} // namespace

CheckResult run_check(const RunConfig& config) {
    validate(config);
    const Problem p = build_problem(config);
    checked_geometry(p, config);
    CheckResult r;
    r.n_cells = p.mesh.n_cells();
    r.n_unknowns = p.coeffs.size();
    r.reference_residual = reference_residual(p);
    r.transposed = transposed(p, config);
    r.max_rel_err = max_relative_error(r.transposed.residual, r.reference_residual);
    r.passed = r.max_rel_err <= check_tolerance(config.scalar);
    return r;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        validate(config);
        switch (config.mode) {
        case Mode::check: return mode_check(config, out);
        case Mode::bench: return mode_bench(config, out);
        case Mode::model: return mode_model(config, out);
        case Mode::sweep: return mode_sweep(config, out);
        case Mode::emit_kernel: return mode_emit_kernel(config, out);
        }
    } catch (const CapacityError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ConfigurationError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}

} // namespace transfem
