#include <doctest.h>

#include <cmath>
#include <numbers>

#include "prandtl/errors.hpp"
#include "prandtl/linearized_prandtl.hpp"
#include "prandtl/nash_moser_driver.hpp"

using namespace prandtl;

namespace {

double mms_error(std::size_t nt, std::size_t nx, std::size_t ny, double a) {
    const GridSpec g{nt, nx, ny, 0.5, 2.0, 12.0};
    const ManufacturedCase mc = manufactured_case(g, a);
    const VorticitySolution s = solve_vorticity(mc.bg, mc.f_tilde, nullptr);
    return (s.w - mc.w_exact).max_abs();
}

}  // namespace

TEST_CASE("manufactured solution converges at second order in space") {
    for (double a : {0.0, 0.7}) {
        const double e1 = mms_error(161, 16, 51, a), e2 = mms_error(161, 32, 101, a);
        CHECK(e2 <= 1e-2);
        CHECK(std::log2(e1 / e2) >= 1.8);
    }
}

TEST_CASE("zero forcing and zero data give zero") {
    const GridSpec g{11, 16, 51, 0.5, 2.0, 8.0};
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
    const VorticitySolution s = solve_case_I(bg, Field(g));
    CHECK(s.w.max_abs() == 0.0);
    CHECK_FALSE(s.energy_log.empty());
    const nlohmann::json j = s.energy_json();
    CHECK(j["total"].size() == s.energy_log.size());
}

TEST_CASE("unweighted energy does not grow without forcing") {
    const GridSpec g{21, 16, 101, 0.5, 2.0, 8.0};
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
    const Field w0 = Field::sample(g, [](double, double x, double y) {
        return std::cos(std::numbers::pi * x) * y * std::exp(-y);
    });
    SolverOptions opt;
    opt.energy_ell = 0.0;
    const VorticitySolution s = solve_case_II(bg, w0, opt);
    REQUIRE(s.energy_log.size() >= 2);
    for (std::size_t i = 1; i < s.energy_log.size(); ++i)
        CHECK(s.energy_log[i].total() <= s.energy_log[i - 1].total());
}

TEST_CASE("velocity recovery round trips through the vorticity") {
    const GridSpec g{6, 16, 201, 0.5, 2.0, 8.0};
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
    const Field w = Field::sample(g, [](double t, double x, double y) {
        return t * std::sin(std::numbers::pi * x) * (0.3 + y) * std::exp(-2.0 * y);
    });
    const Field u = recover_u_from_wall(w, bg);
    const Field back = vorticity_of(u, bg);
    double err = 0.0;
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix)
            for (std::size_t iy = 2; iy < 100; ++iy) err = std::max(err, std::abs(back(it, ix, iy) - w(it, ix, iy)));
    CHECK(err <= 1e-2 * w.max_abs());

    // the wall recovery meets u_y = beta u up to the stencil error
    const double h = g.dy();
    for (std::size_t ix = 0; ix < g.n_x; ix += 5) {
        const double uy0 = (-3.0 * u(5, ix, 0) + 4.0 * u(5, ix, 1) - u(5, ix, 2)) / (2.0 * h);
        CHECK(std::abs(uy0 - shear.beta * u(5, ix, 0)) <= 1e-2 * u.max_abs());
    }
}

TEST_CASE("recovered v vanishes at the wall and closes the divergence") {
    const GridSpec g{6, 32, 201, 0.5, 2.0, 8.0};
    const Field u = Field::sample(g, [](double t, double x, double y) {
        return (1.0 + t) * std::cos(std::numbers::pi * x) * std::exp(-y);
    });
    const Field v = recover_v(u);
    CHECK(v.trace(0).max_abs() == 0.0);
    const Field div = d_x(u) + d_y(v, 1);
    CHECK(div.max_abs() <= 5.0 * (g.dx() * g.dx() + g.dy() * g.dy()) * 10.0);
}

TEST_CASE("background construction guards monotonicity") {
    const GridSpec g{6, 16, 101, 0.5, 2.0, 8.0};
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    const Field p = Field::sample(g, [](double, double, double y) { return -2.0 * y * std::exp(-y); });
    CHECK_THROWS_AS(build_background_from_perturbation(p, Field(g), shear), MonotonicityError);
    const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
    CHECK(bg.delta > 0.0);
    CHECK_THROWS_AS(build_background_from_perturbation(Field(g), Field(g), shear, 1e6), MonotonicityError);
}

TEST_CASE("shape mismatches are structural errors") {
    const GridSpec g{6, 16, 101, 0.5, 2.0, 8.0};
    const ShearProfile shear = canonical_shear(g, 1.0, 1.0);
    const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
    CHECK_THROWS_AS(recover_u_from_wall(Field(GridSpec{6, 16, 51, 0.5, 2.0, 8.0}), bg), StructuralError);
}
