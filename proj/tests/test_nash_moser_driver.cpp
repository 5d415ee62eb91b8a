#include <doctest.h>

#include <cmath>
#include <numbers>

#include "prandtl/errors.hpp"
#include "prandtl/nash_moser_driver.hpp"

using namespace prandtl;

namespace {

IterationConfig small_config() {
    IterationConfig c;
    c.grid = GridSpec{21, 48, 201, 0.5, 2.0, 8.0};
    c.max_iters = 3;
    c.epsilon = 5e-3;
    return c;
}

}  // namespace

TEST_CASE("schedule theta_n = sqrt(theta0^2 + n)") {
    IterationConfig c;
    CHECK(c.theta(0) == doctest::Approx(10.0));
    CHECK(c.theta(5) == doctest::Approx(std::sqrt(105.0)));
    CHECK(c.dtheta(3) == doctest::Approx(std::sqrt(104.0) - std::sqrt(103.0)));
    for (int n = 0; n < 50; ++n) CHECK(c.dtheta(n) > 0.0);
}

TEST_CASE("config validation") {
    IterationConfig c;
    CHECK_NOTHROW(c.validate());
    c.theta0 = 2.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = IterationConfig{};
    c.k0 = 99;
    CHECK_THROWS_AS(c.validate(), StructuralError);
    c = IterationConfig{};
    c.correction_sweeps = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = IterationConfig{};
    c.grid.n_x = 8;  // 1/theta below twice the spacing
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("schedule sums stay bounded") {
    const auto sums = schedule_sum_check(10.0, 7, 200);
    REQUIRE(sums.size() == 5);
    for (const ScheduleSum& s : sums) {
        CHECK(s.ratios.size() == 200);
        CHECK(std::isfinite(s.max_ratio));
        CHECK(s.drift >= 0.0);
        CHECK(s.drift <= 1.0);
    }
}

TEST_CASE("initial perturbation meets the Robin condition") {
    const GridSpec g = small_config().grid;
    for (double beta : {1.0, 100.0}) {
        const Field u0 = initial_perturbation(g, 1.0, beta, 1e-2);
        REQUIRE(u0.nt() == 1);
        CHECK(u0.max_abs() == doctest::Approx(1e-2).epsilon(1e-6));
        const double h = g.dy();
        for (std::size_t ix = 0; ix < g.n_x; ix += 7) {
            const double uy0 = (-3.0 * u0(0, ix, 0) + 4.0 * u0(0, ix, 1) - u0(0, ix, 2)) / (2.0 * h);
            CHECK(std::abs(uy0 - beta * u0(0, ix, 0)) <= 0.05 * 1e-2);
        }
    }
}

TEST_CASE("residual operator vanishes on the shear and its linearization matches") {
    const IterationConfig c = small_config();
    const GridSpec& g = c.grid;
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    CHECK(residual_operator(Field(g), Field(g), shear).max_abs() <= 1e-12);

    const double k = 2.0 * std::numbers::pi / g.x_len;
    const Field pb = Field::sample(g, [k](double t, double x, double y) { return 1e-2 * t * std::cos(k * x) * y * std::exp(-y); });
    const Field vb = Field::sample(g, [k](double t, double x, double y) { return 1e-2 * t * std::sin(k * x) * y * y * std::exp(-y); });
    const Field du = Field::sample(g, [k](double t, double x, double y) { return t * std::sin(k * x) * std::exp(-y); });
    const Field dv = Field::sample(g, [k](double t, double x, double y) { return t * std::cos(k * x) * y * std::exp(-y); });
    const Field lin = linearized_operator(du, dv, pb, vb, shear);
    const Field base = residual_operator(pb, vb, shear);
    double prev = 1e300;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        const Field fd = (residual_operator(pb + eps * du, vb + eps * dv, shear) - base) * (1.0 / eps);
        const double err = (fd - lin).max_abs();
        CHECK(err <= prev);
        prev = err;
    }
    // the remainder is exactly quadratic: eps (du du_x + dv du_y)
    const double eps = 1e-3;
    const Field fd = (residual_operator(pb + eps * du, vb + eps * dv, shear) - base) * (1.0 / eps);
    const Field quad = eps * (du * d_x(du) + dv * d_y(du, 1));
    CHECK((fd - lin - quad).max_abs() <= 1e-9);
}

TEST_CASE("zeroth order starts from the data and keeps the Robin wall") {
    const IterationConfig c = small_config();
    const ShearProfile shear = canonical_shear(c.grid, 1.0, 1.0);
    const Field u0 = initial_perturbation(c.grid, 1.0, 1.0, 1e-2);
    const ZerothOrder z = zeroth_order(shear, u0, c.k0);
    REQUIRE(z.dt_slices.size() == static_cast<std::size_t>(c.k0 + 1));
    for (std::size_t ix = 0; ix < c.grid.n_x; ++ix)
        for (std::size_t iy = 0; iy < c.grid.n_y; ++iy) CHECK(z.p0(0, ix, iy) == doctest::Approx(u0(0, ix, iy)));
    const double h = c.grid.dy();
    for (std::size_t j = 1; j < z.dt_slices.size(); ++j) {
        const Field& a = z.dt_slices[j];
        for (std::size_t ix = 0; ix < c.grid.n_x; ix += 9) {
            const double uy0 = (-3.0 * a(0, ix, 0) + 4.0 * a(0, ix, 1) - a(0, ix, 2)) / (2.0 * h);
            CHECK(std::abs(uy0 - a(0, ix, 0)) <= 1e-12 * (1.0 + a.max_abs()));
        }
    }
}

TEST_CASE("a short iteration keeps every bookkeeping identity") {
    const IterationConfig c = small_config();
    const ShearProfile shear = canonical_shear(c.grid, 1.0, 1.0);
    RunLog log;
    const ConvergenceReport rep = run_iteration(c, shear, 1.0, &log);
    CHECK_FALSE(rep.diverged);
    REQUIRE(rep.records.size() == 3);
    CHECK(rep.iterations == 3);
    CHECK(rep.final_residual < rep.initial_residual);
    for (const IterationRecord& r : rep.records) {
        CHECK(r.theta == doctest::Approx(c.theta(r.n)));
        CHECK(r.audit_increment <= 1e-10);
        CHECK(r.audit_residual <= 1e-10);
        CHECK(r.telescoping <= 1e-10);
        CHECK(r.reconstruction <= 1e-12);
        CHECK(r.guard_margin >= c.delta);
    }
    CHECK(rep.to_json()["per_n"]["n"].size() == 3);
}

TEST_CASE("identical data give identical iterates") {
    IterationConfig c = small_config();
    c.max_iters = 2;
    const ShearProfile shear = canonical_shear(c.grid, 1.0, 1.0);
    const StabilityReport r = stability_experiment(4e-3, 4e-3, shear, 1.0, c);
    CHECK(r.difference_norm <= 1e-12);
    CHECK(r.data_gap == 0.0);
    CHECK(std::isfinite(r.data_functional));
}
