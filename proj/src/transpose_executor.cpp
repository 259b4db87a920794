#include "transfem/transpose_executor.hpp"

#include "transfem/error.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

namespace transfem {

const char* to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& s) {
    if (s == "f32" || s == "float" || s == "single") return Precision::f32;
    if (s == "f64" || s == "double") return Precision::f64;
    throw ConfigurationError("unknown scalar type '" + s + "' (expected f32 or f64)");
}

FlopCounts& FlopCounts::operator+=(const FlopCounts& o) {
    model += o.model;
    replicated += o.replicated;
    f0 += o.f0;
    physics += o.physics;
    aux += o.aux;
    return *this;
}

SharedMemoryImage shared_memory_image(const ExecutionGeometry& g, bool has_f0, Precision precision,
                                      std::size_t aux_per_cell) {
    const auto d = static_cast<std::size_t>(g.dim);
    const auto n_t = static_cast<std::size_t>(g.n_t);
    const auto n_bt = static_cast<std::size_t>(g.n_bt);
    const auto n_q = static_cast<std::size_t>(g.n_q);
    const std::size_t tab_rows = has_f0 ? d + 1 : d;

    SharedMemoryImage img;
    img.width = scalar_width(precision);
    img.tabulation = tab_rows * n_bt * n_q;
    img.geometry = (d * d + 1) * n_t;
    img.coefficients = n_t * n_bt;
    img.f0_values = has_f0 ? n_t * static_cast<std::size_t>(g.n_sqc) : 0;
    img.f1_values = d * n_t * static_cast<std::size_t>(g.n_sqc);
    img.aux = aux_per_cell * static_cast<std::size_t>(g.n_bc);
    return img;
}

FlopCounts VirtualDeviceTrace::total_flops() const {
    FlopCounts sum;
    for (const auto& b : batches) sum += b.flops;
    return sum;
}

std::uint64_t VirtualDeviceTrace::total_bytes() const {
    std::uint64_t sum = tabulation_bytes;
    for (const auto& b : batches) sum += b.bytes_loaded + b.aux_bytes;
    return sum;
}

std::size_t VirtualDeviceTrace::barriers() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += static_cast<std::size_t>(b.barriers);
    return n;
}

void VirtualDeviceTrace::append(VirtualDeviceTrace&& other) {
    batches.insert(batches.end(), other.batches.begin(), other.batches.end());
    tabulation_bytes += other.tabulation_bytes;
    tasks.insert(tasks.end(), other.tasks.begin(), other.tasks.end());
}

void write_trace_csv(std::ostream& os, const VirtualDeviceTrace& trace) {
    os << "chunk,batch,flops,bytes_loaded,barriers\n";
    for (const auto& b : trace.batches)
        os << b.chunk << ',' << b.batch << ',' << b.flops.model << ',' << b.bytes_loaded << ',' << b.barriers << '\n';
}

namespace {

// Storage behind a SharedMemoryImage. Index conventions:
//   tab_b   [q][b][comp]          (only with f0)
//   tab_d   [q][b][comp][k]
//   geo     [slot][d*d + 1]       slot = cell * n_comp + comp, detJ last
//   coef    [slot][b * n_comp + c]
//   f0      [cell][q][comp]
//   f1      [cell][q][comp][k]
//   aux     [cell][aux_per_cell]
template <class T>
struct SharedArrays {
    std::vector<T> tab_b, tab_d, geo, coef, f0, f1, aux;
};

template <class T>
void check_chunk_input(const ExecutionGeometry& g, const Tabulation& tab, const QuadratureRule& rule,
                       const PhysicsForm& form, const ChunkInput<T>& in) {
    const auto n = static_cast<std::size_t>(g.n_chunk);
    const auto d = static_cast<std::size_t>(g.dim);
    if (tab.dim != g.dim || form.dim != g.dim) throw DimensionError("tabulation, form and geometry dimensions disagree");
    if (tab.n_b != g.n_b || tab.n_q != g.n_q || rule.size() != static_cast<std::size_t>(g.n_q))
        throw ShapeError("tabulation does not match execution geometry");
    if (form.n_comp != g.n_comp) throw ShapeError("form component count does not match execution geometry");
    if (in.inv_jacobians.size() != n * d * d || in.determinants.size() != n)
        throw ShapeError("geometry slice does not cover exactly one chunk");
    if (in.coefficients.size() != n * static_cast<std::size_t>(g.n_bt))
        throw ShapeError("coefficient slice does not cover exactly one chunk");
    if (form.n_aux > 0) {
        const std::size_t per_cell = in.aux_space == AuxSpace::cell_constant
                                         ? static_cast<std::size_t>(form.n_aux)
                                         : static_cast<std::size_t>(g.n_b * form.n_aux);
        if (in.aux.empty()) throw MissingAuxiliaryError(form.name + " requires an auxiliary field");
        if (in.aux.size() != n * per_cell) throw ShapeError("auxiliary slice does not cover exactly one chunk");
    } else if (!in.aux.empty()) {
        throw ShapeError(form.name + " takes no auxiliary field");
    }
}

} // namespace

template <class T>
ChunkResult<T> execute_chunk(const ExecutionGeometry& g, const Tabulation& tab, const QuadratureRule& rule,
                             const PhysicsForm& form, const ChunkInput<T>& in, std::size_t chunk_index,
                             const ExecutorOptions& options) {
    check_chunk_input(g, tab, rule, form, in);

    const Precision precision = std::is_same_v<T, float> ? Precision::f32 : Precision::f64;
    const int d = g.dim, n_b = g.n_b, n_q = g.n_q, n_comp = g.n_comp, n_bt = g.n_bt;
    const int n_aux = form.n_aux;
    const int aux_per_cell = n_aux == 0 ? 0 : (in.aux_space == AuxSpace::cell_constant ? n_aux : n_b * n_aux);
    const bool has_f0 = form.has_f0;
    const int geo_stride = d * d + 1;
    const std::uint64_t width = scalar_width(precision);

    const SharedMemoryImage image =
        shared_memory_image(g, has_f0, precision, static_cast<std::size_t>(aux_per_cell));
    if (image.total_bytes() > options.limits.shared_memory_bytes)
        throw CapacityError(image.total_bytes(), options.limits.shared_memory_bytes);

    SharedArrays<T> sh;
    sh.tab_b.resize(has_f0 ? static_cast<std::size_t>(n_q * n_bt) : 0);
    sh.tab_d.resize(static_cast<std::size_t>(n_q * n_bt * d));
    sh.geo.resize(static_cast<std::size_t>(g.n_t * geo_stride));
    sh.coef.resize(static_cast<std::size_t>(g.n_t * n_bt));
    sh.f0.resize(has_f0 ? static_cast<std::size_t>(g.n_bc * n_q * n_comp) : 0);
    sh.f1.resize(static_cast<std::size_t>(g.n_bc * n_q * n_comp * d));
    sh.aux.resize(static_cast<std::size_t>(g.n_bc * aux_per_cell));

    ChunkResult<T> result;
    result.element_vectors.assign(static_cast<std::size_t>(g.n_chunk * n_bt), T(0));
    VirtualDeviceTrace& trace = result.trace;
    trace.batches.reserve(static_cast<std::size_t>(g.n_cb));

    // Tabulation: loaded once per chunk, replicated per component.
    for (int q = 0; q < n_q; ++q)
        for (int b = 0; b < n_b; ++b)
            for (int c = 0; c < n_comp; ++c) {
                const int row = (q * n_b + b) * n_comp + c;
                if (has_f0) sh.tab_b[static_cast<std::size_t>(row)] = static_cast<T>(tab.value(q, b));
                for (int k = 0; k < d; ++k)
                    sh.tab_d[static_cast<std::size_t>(row * d + k)] = static_cast<T>(tab.derivative(q, b, k));
            }
    trace.tabulation_bytes = image.tabulation * width;

    // Thread-private state: each quadrature-phase thread keeps its point's
    // weight, and without f0 also its row of basis values.
    const int threads_per_block = g.n_bs * n_comp;
    std::vector<T> private_w(static_cast<std::size_t>(g.n_t));
    std::vector<T> private_b(static_cast<std::size_t>(g.n_t * n_b));
    for (int t = 0; t < g.n_t; ++t) {
        const int r = t % threads_per_block;
        const int q = (r % g.n_tq) / n_comp;
        private_w[static_cast<std::size_t>(t)] = static_cast<T>(rule.weights[static_cast<std::size_t>(q)]);
        for (int b = 0; b < n_b; ++b)
            private_b[static_cast<std::size_t>(t * n_b + b)] = static_cast<T>(tab.value(q, b));
    }

    std::vector<T> u(static_cast<std::size_t>(n_comp)), grad_u(static_cast<std::size_t>(n_comp * d));
    std::vector<T> a(static_cast<std::size_t>(n_aux)), grad_a(static_cast<std::size_t>(n_aux * d));
    std::vector<T> tg(static_cast<std::size_t>(d)), f1(static_cast<std::size_t>(d));

    if (options.log_tasks)
        trace.tasks.reserve(static_cast<std::size_t>(g.n_cb) * static_cast<std::size_t>(g.n_t) *
                            static_cast<std::size_t>(g.n_sqc + g.n_sbc));

    for (int batch = 0; batch < g.n_cb; ++batch) {
        BatchTrace bt;
        bt.chunk = chunk_index;
        bt.batch = batch;
        const std::size_t batch_cell0 = static_cast<std::size_t>(batch) * static_cast<std::size_t>(g.n_bc);

        // Load geometry and coefficients: thread t stages cell t / n_comp.
        for (int t = 0; t < g.n_t; ++t) {
            const std::size_t cell = batch_cell0 + static_cast<std::size_t>(t / n_comp);
            T* geo = sh.geo.data() + t * geo_stride;
            for (int i = 0; i < d * d; ++i) geo[i] = in.inv_jacobians[cell * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(i)];
            geo[d * d] = in.determinants[cell];
            std::copy_n(in.coefficients.begin() + static_cast<std::ptrdiff_t>(cell * static_cast<std::size_t>(n_bt)),
                        n_bt, sh.coef.begin() + t * n_bt);
            bt.bytes_loaded += static_cast<std::uint64_t>(geo_stride + n_bt) * width;
            if (aux_per_cell > 0 && t % n_comp == 0) {
                std::copy_n(in.aux.begin() + static_cast<std::ptrdiff_t>(cell * static_cast<std::size_t>(aux_per_cell)),
                            aux_per_cell, sh.aux.begin() + (t / n_comp) * aux_per_cell);
                bt.aux_bytes += static_cast<std::uint64_t>(aux_per_cell) * width;
            }
        }

        // Quadrature phase: thread -> (block, cell slot, q, comp).
        for (int step = 0; step < g.n_sqc; ++step) {
            for (int t = 0; t < g.n_t; ++t) {
                const int block = t / threads_per_block;
                const int r = t % threads_per_block;
                const int slot = r / g.n_tq;
                const int q = (r % g.n_tq) / n_comp;
                const int comp = r % n_comp;
                const int cell = block * g.n_bs + step * (g.n_bs / g.n_sqc) + slot;

                const T* geo = sh.geo.data() + (cell * n_comp + comp) * geo_stride;
                const T* coef = sh.coef.data() + (cell * n_comp + comp) * n_bt;
                const T det = geo[d * d];
                const T w = private_w[static_cast<std::size_t>(t)];
                auto basis_value = [&](int b) {
                    return has_f0 ? sh.tab_b[static_cast<std::size_t>((q * n_b + b) * n_comp + comp)]
                                  : private_b[static_cast<std::size_t>(t * n_b + b)];
                };
                auto transformed_gradient = [&](int b, std::uint64_t& counter) {
                    const T* dref = sh.tab_d.data() + ((q * n_b + b) * n_comp + comp) * d;
                    for (int k = 0; k < d; ++k) {
                        T acc = T(0);
                        for (int j = 0; j < d; ++j) acc += geo[j * d + k] * dref[j];
                        tg[static_cast<std::size_t>(k)] = acc;
                        counter += static_cast<std::uint64_t>(2 * d);
                    }
                };

                std::fill(u.begin(), u.end(), T(0));
                std::fill(grad_u.begin(), grad_u.end(), T(0));
                for (int b = 0; b < n_b; ++b) {
                    const T phi = basis_value(b);
                    for (int c = 0; c < n_comp; ++c) {
                        std::uint64_t& counter = c == comp ? bt.flops.model : bt.flops.replicated;
                        const T cf = coef[b * n_comp + c];
                        u[static_cast<std::size_t>(c)] += cf * phi;
                        counter += 2;
                        transformed_gradient(b, counter);
                        for (int k = 0; k < d; ++k) {
                            grad_u[static_cast<std::size_t>(c * d + k)] += cf * tg[static_cast<std::size_t>(k)];
                            counter += 2;
                        }
                    }
                }

                std::fill(a.begin(), a.end(), T(0));
                std::fill(grad_a.begin(), grad_a.end(), T(0));
                if (n_aux > 0) {
                    const T* av = sh.aux.data() + cell * aux_per_cell;
                    if (in.aux_space == AuxSpace::cell_constant) {
                        std::copy_n(av, n_aux, a.begin());
                    } else {
                        for (int b = 0; b < n_b; ++b) {
                            transformed_gradient(b, bt.flops.aux);
                            for (int j = 0; j < n_aux; ++j) {
                                const T cf = av[b * n_aux + j];
                                a[static_cast<std::size_t>(j)] += cf * basis_value(b);
                                for (int k = 0; k < d; ++k)
                                    grad_a[static_cast<std::size_t>(j * d + k)] += cf * tg[static_cast<std::size_t>(k)];
                                bt.flops.aux += static_cast<std::uint64_t>(2 + 2 * d);
                            }
                        }
                    }
                }

                const PointState<T> state{d, u, grad_u, a, grad_a};
                const std::size_t fpos = static_cast<std::size_t>((cell * n_q + q) * n_comp + comp);
                if (has_f0) {
                    sh.f0[fpos] = form.f0(state, comp) * det * w;
                    bt.flops.f0 += 2;
                    bt.flops.physics += static_cast<std::uint64_t>(form.flops_f0);
                }
                form.f1(state, comp, std::span<T>(f1));
                bt.flops.physics += static_cast<std::uint64_t>(form.flops_f1);
                for (int k = 0; k < d; ++k) {
                    sh.f1[fpos * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
                        f1[static_cast<std::size_t>(k)] * det * w;
                    bt.flops.model += 2;
                }
                bt.bytes_loaded += static_cast<std::uint64_t>(d + 1) * width;

                if (options.log_tasks) trace.tasks.push_back({Phase::quadrature, batch, step, t, static_cast<int>(batch_cell0) + cell, q, comp});
            }
        }

        /* ==== TRANSPOSE THREADS ==== */
        ++bt.barriers;

        // Basis phase: thread -> (block, cell slot, b, comp).
        for (int step = 0; step < g.n_sbc; ++step) {
            for (int t = 0; t < g.n_t; ++t) {
                const int block = t / threads_per_block;
                const int r = t % threads_per_block;
                const int slot = r / n_bt;
                const int b = (r % n_bt) / n_comp;
                const int comp = r % n_comp;
                const int cell = block * g.n_bs + step * (g.n_bs / g.n_sbc) + slot;

                const T* geo = sh.geo.data() + (cell * n_comp + comp) * geo_stride;
                T e = T(0);
                for (int q = 0; q < n_q; ++q) {
                    const std::size_t fpos = static_cast<std::size_t>((cell * n_q + q) * n_comp + comp);
                    const std::size_t row = static_cast<std::size_t>((q * n_b + b) * n_comp + comp);
                    if (has_f0) {
                        e += sh.tab_b[row] * sh.f0[fpos];
                        bt.flops.f0 += 2;
                    }
                    const T* dref = sh.tab_d.data() + row * static_cast<std::size_t>(d);
                    for (int k = 0; k < d; ++k) {
                        T acc = T(0);
                        for (int j = 0; j < d; ++j) acc += geo[j * d + k] * dref[j];
                        e += acc * sh.f1[fpos * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
                        bt.flops.model += static_cast<std::uint64_t>(2 * d + 2);
                    }
                }
                result.element_vectors[(batch_cell0 + static_cast<std::size_t>(cell)) * static_cast<std::size_t>(n_bt) +
                                       static_cast<std::size_t>(b * n_comp + comp)] = e;

                if (options.log_tasks) trace.tasks.push_back({Phase::basis, batch, step, t, static_cast<int>(batch_cell0) + cell, b, comp});
            }
        }

        trace.batches.push_back(bt);
    }
    return result;
}

template ChunkResult<float> execute_chunk<float>(const ExecutionGeometry&, const Tabulation&, const QuadratureRule&,
                                                 const PhysicsForm&, const ChunkInput<float>&, std::size_t,
                                                 const ExecutorOptions&);
template ChunkResult<double> execute_chunk<double>(const ExecutionGeometry&, const Tabulation&, const QuadratureRule&,
                                                   const PhysicsForm&, const ChunkInput<double>&, std::size_t,
                                                   const ExecutorOptions&);

namespace {

template <class T>
std::vector<T> convert(std::span<const double> src) {
    if constexpr (std::is_same_v<T, double>) return {src.begin(), src.end()};
    else {
        std::vector<T> out(src.size());
        std::transform(src.begin(), src.end(), out.begin(), [](double v) { return static_cast<T>(v); });
        return out;
    }
}

template <class T>
void run_chunks(const ExecutionGeometry& g, const Tabulation& tab, const QuadratureRule& rule, const PhysicsForm& form,
                const CellGeometry& cell_geom, std::span<const double> coeffs, const AuxField* aux,
                const ExecutorOptions& options, std::span<double> elem_out, VirtualDeviceTrace& trace) {
    const int d = g.dim;
    const std::vector<T> inv = convert<T>(cell_geom.inv_jacobians);
    const std::vector<T> det = convert<T>(cell_geom.determinants);
    const std::vector<T> cf = convert<T>(coeffs);
    const std::vector<T> av = aux ? convert<T>(aux->values) : std::vector<T>{};
    const std::size_t aux_per_cell = aux ? aux->per_cell(d) : 0;

    const auto n_chunk = static_cast<std::size_t>(g.n_chunk);
    const auto n_bt = static_cast<std::size_t>(g.n_bt);
    const auto dd = static_cast<std::size_t>(d * d);
    std::vector<VirtualDeviceTrace> traces(g.n_chunks);

    auto work = [&](std::size_t chunk) {
        const std::size_t c0 = chunk * n_chunk;
        ChunkInput<T> input;
        input.inv_jacobians = std::span<const T>(inv).subspan(c0 * dd, n_chunk * dd);
        input.determinants = std::span<const T>(det).subspan(c0, n_chunk);
        input.coefficients = std::span<const T>(cf).subspan(c0 * n_bt, n_chunk * n_bt);
        if (aux) {
            input.aux = std::span<const T>(av).subspan(c0 * aux_per_cell, n_chunk * aux_per_cell);
            input.aux_space = aux->space;
        }
        auto res = execute_chunk<T>(g, tab, rule, form, input, chunk, options);
        std::transform(res.element_vectors.begin(), res.element_vectors.end(),
                       elem_out.begin() + static_cast<std::ptrdiff_t>(c0 * n_bt),
                       [](T v) { return static_cast<double>(v); });
        traces[chunk] = std::move(res.trace);
    };

    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    if (jobs == 1 || g.n_chunks < 2) {
        for (std::size_t c = 0; c < g.n_chunks; ++c) work(c);
    } else {
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                try {
                    for (std::size_t c = j; c < g.n_chunks; c += jobs) work(c);
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (auto& t : traces) trace.append(std::move(t));
}

} // namespace

TransposedResult integrate_transposed(const Mesh& mesh, const CellGeometry& cell_geom, const FieldLayout& layout,
                                      const Tabulation& tab, const QuadratureRule& rule, const PhysicsForm& form,
                                      BlockingParams blocking, std::span<const double> global_coeffs,
                                      const AuxField* aux, Precision precision, const ExecutorOptions& options) {
    if (layout.n_comp != form.n_comp) throw ShapeError("field layout and form disagree on component count");
    if (cell_geom.n_cells() != mesh.n_cells() || cell_geom.dim != mesh.dim)
        throw ShapeError("cell geometry does not match mesh");
    check_aux(form, aux, mesh.n_cells(), mesh.dim);

    TransposedResult result;
    result.geometry = derive_execution_geometry({mesh.dim, tab.n_b, form.n_comp, tab.n_q, blocking.n_bl, blocking.n_cb},
                                                mesh.n_cells(), options.limits);
    const ExecutionGeometry& g = result.geometry;
    const SharedMemoryImage image =
        shared_memory_image(g, form.has_f0, precision, aux ? aux->per_cell(mesh.dim) : 0);
    if (image.total_bytes() > options.limits.shared_memory_bytes)
        throw CapacityError(image.total_bytes(), options.limits.shared_memory_bytes);

    const std::vector<double> coeffs = gather_coefficients(mesh, layout, global_coeffs);
    result.element_vectors.assign(layout.cell_array_size(mesh), 0.0);

    if (precision == Precision::f32)
        run_chunks<float>(g, tab, rule, form, cell_geom, coeffs, aux, options, result.element_vectors, result.trace);
    else
        run_chunks<double>(g, tab, rule, form, cell_geom, coeffs, aux, options, result.element_vectors, result.trace);

    const std::size_t first_rem = g.n_chunks * static_cast<std::size_t>(g.n_chunk);
    const auto block = layout.cell_block(mesh);
    integrate_reference_cells(tab, rule, cell_geom, form, coeffs, aux, first_rem, mesh.n_cells(),
                              std::span<double>(result.element_vectors).subspan(first_rem * block));

    result.residual = scatter_add_element_vectors(mesh, layout, result.element_vectors);
    return result;
}

} // namespace transfem
