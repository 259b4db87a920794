#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "transfem/error.hpp"
#include "transfem/run.hpp"

#include <sstream>

using namespace transfem;

TEST_CASE("seeded fields") {
    const Mesh m = generate_unit_simplex_mesh(2, 3);
    const auto a = seeded_field(m, {2}, FieldKind::random, 7);
    CHECK(a.size() == 32);
    CHECK(a == seeded_field(m, {2}, FieldKind::random, 7));
    CHECK(a != seeded_field(m, {2}, FieldKind::random, 8));
    for (double x : a) CHECK((x >= -1.0 && x <= 1.0));

    const auto c = seeded_field(m, {1}, FieldKind::constant, 0);
    CHECK(c == std::vector<double>(16, 1.0));

    const auto f = seeded_field(m, {2}, FieldKind::affine, 0);
    for (std::size_t v = 0; v < m.n_vertices(); ++v) {
        const double base = 2.0 * m.vertex(v)[0] + 3.0 * m.vertex(v)[1] + 1.0;
        CHECK(f[2 * v] == base);
        CHECK(f[2 * v + 1] == 2.0 * base);
    }

    const Mesh m3 = generate_unit_simplex_mesh(3, 1);
    const auto f3 = seeded_field(m3, {1}, FieldKind::affine, 0);
    CHECK(f3.back() == 2.0 + 3.0 - 1.0 + 1.0); // vertex (1, 1, 1)
}

TEST_CASE("option parsing") {
    CHECK(parse_mode("emit-kernel") == Mode::emit_kernel);
    CHECK(std::string(to_string(Mode::sweep)) == "sweep");
    CHECK_THROWS_AS(parse_mode("fast"), ConfigurationError);
    CHECK(parse_field_kind("affine") == FieldKind::affine);
    CHECK_THROWS_AS(parse_field_kind("smooth"), ConfigurationError);
}

TEST_CASE("relative error") {
    CHECK(max_relative_error({1, 2, 4}, {1, 2, 4}) == 0.0);
    CHECK(max_relative_error({1, 2, 3}, {1, 2, 4}) == 0.25);
    CHECK(max_relative_error({0.5}, {0.0}) == 0.5);
    CHECK_THROWS_AS(max_relative_error({1}, {1, 2}), ShapeError);
    CHECK(check_tolerance(Precision::f32) == 1e-5);
    CHECK(check_tolerance(Precision::f64) == 1e-11);
}

TEST_CASE("check mode passes and reports") {
    RunConfig c;
    c.refine = 10;
    c.n_bl = 4;
    c.n_cb = 2;
    std::ostringstream out, err;
    CHECK(run(c, out, err) == kExitOk);
    CHECK(out.str().find("PASS") != std::string::npos);

    c.scalar = Precision::f64;
    c.physics = "elasticity";
    const auto r = run_check(c);
    CHECK(r.passed);
    CHECK(r.max_rel_err == 0.0);
    CHECK(r.n_unknowns == 2 * 121);
}

TEST_CASE("configuration errors map to exit code 2") {
    std::ostringstream out, err;
    RunConfig c;
    c.physics = "elasticity";
    c.n_bl = 200; // 1200 threads
    CHECK(run(c, out, err) == kExitConfigError);
    CHECK(err.str().find("configuration error") != std::string::npos);

    RunConfig d;
    d.dim = 3;
    d.refine = 3;
    d.physics = "elasticity";
    d.scalar = Precision::f64;
    d.n_bl = 36;
    CHECK(run(d, out, err) == kExitConfigError); // shared memory

    RunConfig e;
    e.physics = "stokes";
    CHECK(run(e, out, err) == kExitConfigError);

    RunConfig f;
    f.refine = 0;
    CHECK(run(f, out, err) == kExitConfigError);
}

TEST_CASE("sweep covers the full grid") {
    RunConfig c;
    c.mode = Mode::sweep;
    c.refine = 24;
    std::ostringstream out, err;
    CHECK(run(c, out, err) == kExitOk);
    const std::string s = out.str();
    const auto header = s.find("dim,physics,scalar,n_bl,n_cb,n_cells,max_rel_err,model_flops,bytes,beta,wall_ms,mflops_rate\n");
    REQUIRE(header != std::string::npos);
    std::istringstream rows(s.substr(header));
    std::string line;
    int n = 0;
    while (std::getline(rows, line))
        if (!line.empty()) ++n;
    CHECK(n == 1 + 24);
    CHECK(s.find("all configurations PASS") != std::string::npos);
}

TEST_CASE("model and emit-kernel modes") {
    std::ostringstream out, err;
    RunConfig c;
    c.mode = Mode::model;
    CHECK(run(c, out, err) == kExitOk);
    CHECK(out.str().find("beta = 41/22") != std::string::npos);

    std::ostringstream k;
    c.mode = Mode::emit_kernel;
    c.physics = "elasticity";
    CHECK(run(c, k, err) == kExitOk);
    CHECK(k.str().find("__kernel void integrateElementQuadrature") != std::string::npos);
}

TEST_CASE("bench runs at least five repetitions") {
    std::ostringstream out, err;
    RunConfig c;
    c.mode = Mode::bench;
    c.refine = 8;
    c.n_bl = 2;
    c.repetitions = 1;
    CHECK(run(c, out, err) == kExitOk);
    CHECK(out.str().find("repetitions=5") != std::string::npos);
    CHECK(out.str().find("not comparable") != std::string::npos);
}

TEST_CASE("jobs do not change the check result") {
    RunConfig c;
    c.dim = 3;
    c.refine = 6;
    c.physics = "poisson-varcoef";
    c.scalar = Precision::f32;
    c.n_bl = 3;
    c.n_cb = 2;
    const auto a = run_check(c);
    c.jobs = 8;
    const auto b = run_check(c);
    CHECK(a.transposed.residual == b.transposed.residual);
    CHECK(a.max_rel_err == b.max_rel_err);
}
