#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "prandtl/errors.hpp"
#include "prandtl/smoothing_ops.hpp"

using namespace prandtl;

namespace {

const GridSpec kGrid{33, 64, 129, 0.5, 2.0, 4.0};
const double kTwoPiOverL = 2.0 * std::numbers::pi / 2.0;

Field random_field(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field f(kGrid);
    for (double& v : f.values()) v = U(rng);
    return f;
}

}  // namespace

TEST_CASE("bump and discrete weights") {
    CHECK(Mollifier::bump(0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(Mollifier::bump(1.0) == 0.0);
    CHECK(Mollifier::bump(-1.2) == 0.0);
    Mollifier m;
    m.theta = 4.0;
    int r_min = 0;
    const auto w = m.weights(0.05, 0.25, r_min);
    double s = 0.0;
    for (double v : w) {
        CHECK(v >= 0.0);
        s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("resolvability is enforced") {
    CHECK_NOTHROW(check_resolvable(kGrid, 4.0));
    CHECK_THROWS_AS(check_resolvable(kGrid, 20.0), StructuralError);
    CHECK_THROWS_AS(smooth_S(Field(kGrid), 20.0), StructuralError);
}

TEST_CASE("smoothers are linear") {
    const Field f = random_field(1), g = random_field(2);
    for (auto op : {&smooth_S, &smooth_Su}) {
        const Field lhs = op(2.0 * f - 0.5 * g, 4.0, ShiftSign::past);
        const Field rhs = 2.0 * op(f, 4.0, ShiftSign::past) - 0.5 * op(g, 4.0, ShiftSign::past);
        CHECK((lhs - rhs).max_abs() <= 1e-12);
    }
}

TEST_CASE("S reproduces constants once the history window is inside the domain") {
    const Field c = Field::sample(kGrid, [](double, double, double) { return 2.0; });
    const Field s = smooth_S(c, 4.0);
    for (std::size_t it = 0; it < kGrid.n_t; ++it) {
        if (kGrid.t(it) < 2.0 / 4.0 + 1e-12) continue;
        for (std::size_t iy = 0; iy < kGrid.n_y; iy += 8) CHECK(s(it, 3, iy) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("S^v keeps a zero wall trace") {
    const Field v = Field::sample(kGrid, [](double t, double x, double y) { return (1.0 + t) * std::sin(kTwoPiOverL * x) * y; });
    CHECK(smooth_Sv(v, 4.0).trace(0).max_abs() <= 1e-12);
    CHECK(smooth_Sv(v, 4.0, ShiftSign::future).trace(0).max_abs() <= 1e-12);
}

TEST_CASE("divergence preservation converges at second order") {
    auto residual = [](const GridSpec& g) {
        const Field u = Field::sample(g, [](double, double x, double y) { return std::cos(kTwoPiOverL * x) * std::exp(-y); });
        const Field v = Field::sample(g, [](double, double x, double y) {
            return kTwoPiOverL * std::sin(kTwoPiOverL * x) * (1.0 - std::exp(-y));
        });
        return verify_divergence_preservation(u, v, 4.0);
    };
    const GridSpec gc{17, 32, 65, 0.5, 2.0, 4.0};
    const double rc = residual(gc), rf = residual(kGrid);
    CHECK(rf <= 5.0 * (kGrid.dx() * kGrid.dx() + kGrid.dy() * kGrid.dy()));
    CHECK(rc / rf >= 3.0);
}

TEST_CASE("divergence check rejects inputs that break its preconditions") {
    const Field u(kGrid);
    const Field v = Field::sample(kGrid, [](double, double, double) { return 1.0; });
    CHECK_THROWS_AS(verify_divergence_preservation(u, v, 4.0), DomainError);
}

TEST_CASE("multiplying by a constant commutes with smoothing") {
    const Field f = random_field(3);
    const Field c = Field::sample(kGrid, [](double, double, double) { return 1.5; });
    CHECK(commutator_gap(f, c, 4.0, 0) <= 1e-12);
}

TEST_CASE("approximation error decays like 1/theta on a smooth field") {
    const GridSpec g{73, 72, 145, 2.0, 2.0, 4.0};
    const Field f = Field::sample(g, [](double t, double, double y) {
        return (t > 0.0 ? std::exp(-1.0 / t) : 0.0) * std::exp(-0.1 * y);
    });
    const ExponentFit fit = measure_operator_exponents({f}, ExponentProbe::approximation, 0, 1, {4.0, 8.0, 16.0});
    CHECK(fit.ratios.size() == 3);
    CHECK(fit.exponent() == doctest::Approx(-1.0).epsilon(0.15));
}
