#include "transfem/perf_model.hpp"

#include "transfem/error.hpp"

#include <iomanip>
#include <numeric>
#include <ostream>

namespace transfem {

Rational Rational::make(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string to_string(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

SharedMemoryEstimate shared_memory_bytes(const ExecutionGeometry& g, std::size_t s, bool needs_f0) {
    const std::uint64_t d = static_cast<std::uint64_t>(g.dim);
    const std::uint64_t n_t = static_cast<std::uint64_t>(g.n_t);
    const std::uint64_t n_bt = static_cast<std::uint64_t>(g.n_bt);
    const std::uint64_t n_q = static_cast<std::uint64_t>(g.n_q);
    const std::uint64_t n_sqc = static_cast<std::uint64_t>(g.n_sqc);
    const std::uint64_t f_rows = needs_f0 ? d + 1 : d;

    SharedMemoryEstimate est;
    est.block_bytes = s * ((d * d + 1) * n_t + f_rows * n_bt * n_q + n_t * n_bt + f_rows * n_t * n_sqc);
    est.per_cell_bytes = static_cast<double>(est.block_bytes) / static_cast<double>(g.n_bc);
    return est;
}

TrafficEstimate traffic_and_flops(const ExecutionGeometry& g, std::size_t s) {
    const std::uint64_t d = static_cast<std::uint64_t>(g.dim);
    const std::uint64_t n_t = static_cast<std::uint64_t>(g.n_t);
    const std::uint64_t n_bt = static_cast<std::uint64_t>(g.n_bt);
    const std::uint64_t n_q = static_cast<std::uint64_t>(g.n_q);
    const std::uint64_t n_comp = static_cast<std::uint64_t>(g.n_comp);
    const std::uint64_t cells = static_cast<std::uint64_t>(g.n_bs) * static_cast<std::uint64_t>(g.n_bl);

    TrafficEstimate est;
    est.bytes_per_batch = s * n_t * ((d * d + 1) + n_bt + (d + 1) * n_q);
    // per cell: field evaluation at quadrature points, f1 weight scaling, basis reduction
    const std::uint64_t per_cell = (2 + (2 + 2 * d) * d) * n_bt * n_q + 2 * d * n_comp * n_q + (2 + 2 * d) * d * n_q * n_bt;
    est.flops_per_batch = per_cell * cells;
    return est;
}

Rational balance(const ExecutionGeometry& g, std::size_t s) {
    const TrafficEstimate t = traffic_and_flops(g, s);
    return Rational::make(t.flops_per_batch, t.bytes_per_batch);
}

Rational balance(const ExecutionGeometry& g) { return balance(g, 4); }

double predict_bandwidth_bound(double beta, double achievable_bw_gbs) {
    if (!(beta >= 0.0) || !(achievable_bw_gbs >= 0.0))
        throw DomainError("balance and bandwidth must be non-negative");
    return beta * achievable_bw_gbs;
}

PerfEstimate estimate(const ExecutionGeometry& g, std::size_t s, bool needs_f0, std::size_t cap) {
    PerfEstimate est;
    est.geometry = g;
    est.scalar_width = s;
    const auto shm = shared_memory_bytes(g, s, needs_f0);
    est.shared_bytes_block = shm.block_bytes;
    est.shared_bytes_per_cell = shm.per_cell_bytes;
    const auto tf = traffic_and_flops(g, s);
    est.bytes_per_batch = tf.bytes_per_batch;
    est.flops_per_batch = tf.flops_per_batch;
    est.balance = balance(g, s);
    est.balance_single = balance(g, 4);
    est.occupancy_hint = shm.block_bytes == 0 ? 0 : cap / shm.block_bytes;
    return est;
}

void write_model_report(std::ostream& os, const PerfEstimate& e) {
    const auto& g = e.geometry;
    os << "geometry   d=" << g.dim << " N_b=" << g.n_b << " N_comp=" << g.n_comp << " N_q=" << g.n_q
       << " N_bl=" << g.n_bl << " N_cb=" << g.n_cb << '\n'
       << "derived    N_bt=" << g.n_bt << " N_bs=" << g.n_bs << " N_bc=" << g.n_bc << " N_t=" << g.n_t
       << " N_sqc=" << g.n_sqc << " N_sbc=" << g.n_sbc << " N_cbc=" << g.n_cbc << '\n'
       << "scalar     " << e.scalar_width << " bytes\n"
       << "shared     M = " << e.shared_bytes_block << " bytes/block, M_c = " << std::fixed << std::setprecision(3)
       << e.shared_bytes_per_cell << " bytes/cell\n"
       << std::defaultfloat << "traffic    " << e.bytes_per_batch << " bytes/batch\n"
       << "compute    " << e.flops_per_batch << " flops/batch\n"
       << "balance    beta = " << to_string(e.balance) << " = " << std::setprecision(6) << e.balance.value()
       << " flop/byte";
    if (e.scalar_width != 4)
        os << " (single precision beta = " << to_string(e.balance_single) << " = " << e.balance_single.value() << ")";
    os << "\noccupancy  " << e.occupancy_hint << " resident blocks\n" << std::defaultfloat;
}

void write_model_csv_header(std::ostream& os) {
    os << "dim,n_b,n_comp,n_q,n_bl,n_cb,n_bt,n_bs,n_bc,n_t,n_sqc,n_sbc,scalar_width,M,M_c,bytes_per_batch,"
          "flops_per_batch,beta_num,beta_den,beta,occupancy_hint\n";
}

void write_model_csv_row(std::ostream& os, const PerfEstimate& e) {
    const auto& g = e.geometry;
    os << g.dim << ',' << g.n_b << ',' << g.n_comp << ',' << g.n_q << ',' << g.n_bl << ',' << g.n_cb << ',' << g.n_bt
       << ',' << g.n_bs << ',' << g.n_bc << ',' << g.n_t << ',' << g.n_sqc << ',' << g.n_sbc << ',' << e.scalar_width
       << ',' << e.shared_bytes_block << ',' << std::setprecision(10) << e.shared_bytes_per_cell << ','
       << e.bytes_per_batch << ',' << e.flops_per_batch << ',' << e.balance.num << ',' << e.balance.den << ','
       << std::setprecision(17) << e.balance.value() << ',' << e.occupancy_hint << '\n'
       << std::setprecision(6);
}

} // namespace transfem
