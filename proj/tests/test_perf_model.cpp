#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "transfem/error.hpp"
#include "transfem/perf_model.hpp"

#include <algorithm>
#include <sstream>

using namespace transfem;

namespace {

ExecutionGeometry geom(int dim, int n_comp, int n_q, int n_bl, int n_cb = 1) {
    return derive_execution_geometry({dim, dim + 1, n_comp, n_q, n_bl, n_cb}, 0);
}

} // namespace

TEST_CASE("poisson 2D with one block") {
    const auto g = geom(2, 1, 1, 1);
    // M = 4 (5*3 + 3*3*1 + 3*3 + 3*3*1), reduced: the tabulation and f rows drop to d
    CHECK(shared_memory_bytes(g, 4, true).block_bytes == 168);
    CHECK(shared_memory_bytes(g, 4, false).block_bytes == 144);
    const auto tf = traffic_and_flops(g, 4);
    CHECK(tf.bytes_per_batch == 132);
    CHECK(tf.flops_per_batch == 246);
    CHECK(balance(g) == Rational{41, 22});
    CHECK(to_string(balance(g)) == "41/22");
}

TEST_CASE("balance does not depend on the blocking") {
    for (int dim : {2, 3})
        for (int n_comp : {1, dim})
            for (int n_bl : {1, 2, 16, 36})
                for (int n_cb : {1, 4, 16})
                    CHECK(balance(geom(dim, n_comp, 1, n_bl, n_cb)) == balance(geom(dim, n_comp, 1, 1, 1)));
}

TEST_CASE("balance of the shipped forms") {
    CHECK(balance(geom(2, 1, 1, 1)) == Rational{41, 22});
    CHECK(balance(geom(2, 2, 1, 1)) == Rational{41, 28});
    CHECK(balance(geom(3, 1, 1, 1)) == Rational{103, 36});
    CHECK(balance(geom(3, 3, 1, 1)) == Rational{103, 52});
    // doubling the scalar width halves the balance
    CHECK(balance(geom(2, 1, 1, 1), 8) == Rational{41, 44});
}

TEST_CASE("two-component P1 triangle with two points and two blocks") {
    const auto g = geom(2, 2, 2, 2);
    const auto tf = traffic_and_flops(g, 4);
    CHECK(tf.bytes_per_batch == 1632);
    CHECK(tf.flops_per_batch == 3936);
    CHECK(shared_memory_bytes(g, 4, true).block_bytes == 1776);
    CHECK(shared_memory_bytes(g, 4, false).block_bytes == 1536);
    CHECK(shared_memory_bytes(g, 4, false).per_cell_bytes == 128.0);
}

TEST_CASE("per-cell shared memory follows the per-cell bound") {
    for (int dim : {2, 3})
        for (int n_comp : {1, dim})
            for (int n_bl : {1, 4, 32}) {
                const auto g = geom(dim, n_comp, 1, n_bl);
                const double d = dim, bt = g.n_bt;
                const double full = 4.0 * n_comp * ((d * d + 1) + (d + 1) / n_bl + bt + (d + 1));
                const double reduced = 4.0 * n_comp * ((d * d + 1) + d / n_bl + bt + d);
                CHECK(shared_memory_bytes(g, 4, true).per_cell_bytes == doctest::Approx(full).epsilon(1e-14));
                CHECK(shared_memory_bytes(g, 4, false).per_cell_bytes == doctest::Approx(reduced).epsilon(1e-14));
            }
}

TEST_CASE("shared memory of a 32-block poisson batch") {
    const auto e = estimate(geom(2, 1, 1, 32), 4, false);
    CHECK(e.shared_bytes_block == 3864);
    CHECK(e.occupancy_hint == 12);
    CHECK(estimate(geom(2, 1, 1, 32), 4, true).shared_bytes_block == 4260);
}

TEST_CASE("bandwidth-bound prediction") {
    CHECK(predict_bandwidth_bound(41.0 / 22.0, 150.0) == doctest::Approx(279.5454545).epsilon(1e-9));
    CHECK(predict_bandwidth_bound(0.0, 150.0) == 0.0);
    CHECK_THROWS_AS(predict_bandwidth_bound(-1.0, 150.0), DomainError);
    CHECK_THROWS_AS(predict_bandwidth_bound(1.0, -1.0), DomainError);
}

TEST_CASE("rational and floating balance agree") {
    const auto r = balance(geom(2, 1, 1, 1));
    CHECK(std::abs(r.value() - 41.0 / 22.0) <= 1e-15);
    CHECK(Rational::make(6, 4) == Rational{3, 2});
    CHECK_THROWS_AS(Rational::make(1, 0), DomainError);
}

TEST_CASE("report and csv output") {
    const auto e = estimate(geom(2, 1, 1, 16, 8), 8, false);
    std::ostringstream os;
    write_model_report(os, e);
    CHECK(os.str().find("beta = 41/44") != std::string::npos);
    CHECK(os.str().find("single precision beta = 41/22") != std::string::npos);

    std::ostringstream csv;
    write_model_csv_header(csv);
    write_model_csv_row(csv, e);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(row.rfind("2,3,1,1,16,8,", 0) == 0);
}
