#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>

#include "prandtl/errors.hpp"
#include "prandtl/grid_field.hpp"
#include "prandtl/parallel.hpp"

using namespace prandtl;

namespace {

const GridSpec kGrid{11, 32, 81, 0.5, 2.0, 4.0};

Field random_field(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field f(g);
    for (double& v : f.values()) v = U(rng);
    return f;
}

}  // namespace

TEST_CASE("grid spacing and validation") {
    CHECK(kGrid.dt() == doctest::Approx(0.05));
    CHECK(kGrid.dx() == doctest::Approx(2.0 / 32));
    CHECK(kGrid.dy() == doctest::Approx(0.05));
    CHECK(kGrid.max_spacing() == doctest::Approx(2.0 / 32));
    CHECK_THROWS_AS((GridSpec{3, 8, 8, 1.0, 1.0, 1.0}.validate()), StructuralError);
    CHECK_THROWS_AS((GridSpec{8, 8, 8, 1.0, 0.0, 1.0}.validate()), StructuralError);
    CHECK_NOTHROW(kGrid.validate());
}

TEST_CASE("field arithmetic rejects shape mismatch") {
    Field a(kGrid), b(GridSpec{11, 32, 41, 0.5, 2.0, 4.0});
    CHECK_THROWS_AS(a + b, StructuralError);
    CHECK_THROWS_AS(a += b, StructuralError);
    const Field t = a.trace(0);
    CHECK(t.kind() == FieldKind::boundary_trace);
    CHECK(t.ny() == 1);
}

TEST_CASE("d_x is second order on a periodic sine") {
    const double k = 2.0 * std::numbers::pi / kGrid.x_len;
    const Field f = Field::sample(kGrid, [k](double, double x, double) { return std::sin(k * x); });
    const Field exact = Field::sample(kGrid, [k](double, double x, double) { return k * std::cos(k * x); });
    const double h = kGrid.dx();
    CHECK((d_x(f) - exact).max_abs() <= 1.05 * k * k * k * h * h / 6.0);
}

TEST_CASE("d_y stencils are exact on low-degree polynomials") {
    const Field sq = Field::sample(kGrid, [](double, double, double y) { return y * y; });
    const Field lin = Field::sample(kGrid, [](double, double, double y) { return 2.0 * y; });
    CHECK((d_y(sq, 1) - lin).max_abs() <= 1e-11);
    const Field cube = Field::sample(kGrid, [](double, double, double y) { return y * y * y; });
    const Field six_y = Field::sample(kGrid, [](double, double, double y) { return 6.0 * y; });
    CHECK((d_y(cube, 2) - six_y).max_abs() <= 1e-8);
    const Field tsq = Field::sample(kGrid, [](double t, double, double) { return t * t; });
    const Field two_t = Field::sample(kGrid, [](double t, double, double) { return 2.0 * t; });
    CHECK((d_t(tsq) - two_t).max_abs() <= 1e-11);
}

TEST_CASE("difference operators are linear and d_x has zero periodic mean") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const Field f = random_field(kGrid, seed), g = random_field(kGrid, seed + 100);
        const double a = 0.3 * seed, b = -1.7;
        CHECK((d_y(a * f + b * g, 1) - (a * d_y(f, 1) + b * d_y(g, 1))).max_abs() <= 1e-10);
        CHECK((d_x(a * f + b * g) - (a * d_x(f) + b * d_x(g))).max_abs() <= 1e-10);
        const Field dx = d_x(f);
        for (std::size_t it = 0; it < kGrid.n_t; it += 5) {
            double sum = 0.0;
            for (std::size_t ix = 0; ix < kGrid.n_x; ++ix) sum += dx(it, ix, 7);
            CHECK(std::abs(sum) <= 1e-9);
        }
    }
}

TEST_CASE("tail and cumulative integrals") {
    const Field e = Field::sample(kGrid, [](double, double, double y) { return std::exp(-y); });
    const Field exact = Field::sample(kGrid, [](double, double, double y) { return std::exp(-y) - std::exp(-4.0); });
    CHECK((tail_integral(e) - exact).max_abs() <= 1e-3);
    const Field one = Field::sample(kGrid, [](double, double, double) { return 1.0; });
    const Field y = Field::sample(kGrid, [](double, double, double yy) { return yy; });
    CHECK((cumulative_integral(one) - y).max_abs() <= 1e-12);

    RunLog log;
    (void)tail_integral(one, &log);
    CHECK_FALSE(log.empty());
    RunLog quiet;
    (void)tail_integral(Field::sample(kGrid, [](double, double, double yy) { return std::exp(-10.0 * yy); }), &quiet);
    CHECK(quiet.empty());
}

TEST_CASE("trapezoid weights integrate constants") {
    const auto w = trapezoid_weights(81, 0.05);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(4.0));
    CHECK(w.front() == doctest::Approx(0.025));
}

TEST_CASE("parallel_for visits every index once") {
    CHECK(thread_count() >= 1);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("require_finite names the offending field") {
    Field f(kGrid);
    f(1, 2, 3) = std::nan("");
    CHECK_FALSE(f.all_finite());
    CHECK_THROWS_AS(f.require_finite("probe"), NumericalError);
}
