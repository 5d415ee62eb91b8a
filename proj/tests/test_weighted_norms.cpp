#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "prandtl/weighted_norms.hpp"

using namespace prandtl;

namespace {

const GridSpec kGrid{21, 32, 161, 0.5, 2.0, 8.0};

Field random_smooth(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double a = U(rng), b = U(rng), c = U(rng), ph = U(rng) * std::numbers::pi;
    const double k = 2.0 * std::numbers::pi / kGrid.x_len;
    return Field::sample(kGrid, [=](double t, double x, double y) {
        return (a + b * t + c * std::sin(k * x + ph)) * std::exp(-0.5 * y) * (1.0 + y);
    });
}

}  // namespace

TEST_CASE("index sets") {
    CHECK(index_set(0) == std::vector<IndexPair>{{0, 0}});
    auto s1 = index_set(1);
    std::sort(s1.begin(), s1.end());
    CHECK(s1 == std::vector<IndexPair>{{0, 0}, {0, 1}, {0, 2}, {1, 0}});
    const auto s2 = index_set(2);
    auto has = [&](IndexPair p) { return std::find(s2.begin(), s2.end(), p) != s2.end(); };
    CHECK(has({0, 4}));
    CHECK(has({1, 2}));
    CHECK(has({2, 0}));
    CHECK_FALSE(has({1, 3}));
    CHECK_FALSE(has({2, 1}));
    for (int k = 0; k <= 4; ++k)
        for (const IndexPair& p : index_set(k)) CHECK(p.first + (p.second + 1) / 2 <= k);
}

TEST_CASE("A norm of an inverse square against the closed form") {
    const Field f = Field::sample(kGrid, [](double, double, double y) { return 1.0 / (1.0 + y * y); });
    // ell = 1: int_0^Y <y>^2 / (1+y^2)^2 dy = atan(Y)
    const double exact = std::sqrt(kGrid.t_max * kGrid.x_len * std::atan(kGrid.y_max));
    CHECK(std::abs(norm_A(f, 0, 1.0) - exact) / exact <= 1e-3);
}

TEST_CASE("boundary and D norms of a wall sine") {
    const double k = 2.0 * std::numbers::pi / kGrid.x_len;
    const Field tr = Field::sample_trace(kGrid, [k](double, double x) { return std::sin(k * x); });
    const double ref = std::sqrt(kGrid.t_max * kGrid.x_len / 2.0);
    CHECK(norm_boundary_A(tr, 0) == doctest::Approx(ref).epsilon(1e-3));
    const double kh = std::sin(k * kGrid.dx()) / kGrid.dx();
    CHECK(norm_boundary_A(tr, 1) == doctest::Approx(ref * std::sqrt(1.0 + kh * kh)).epsilon(1e-10));
    const Field e = Field::sample(kGrid, [k](double, double x, double y) { return std::exp(-y) * std::sin(k * x); });
    MixedParams p;
    p.k = 0;
    p.ell = 0.0;
    CHECK(norm_mixed(e, MixedFamily::D, p) == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("norm axioms hold on random smooth fields") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 6; ++trial) {
        const Field f = random_smooth(rng), g = random_smooth(rng);
        for (int k = 0; k <= 2; ++k) {
            const double nf = norm_A(f, k, 1.0), ng = norm_A(g, k, 1.0);
            CHECK(norm_A(-2.5 * f, k, 1.0) == doctest::Approx(2.5 * nf).epsilon(1e-12));
            CHECK(norm_A(f + g, k, 1.0) <= nf + ng + 1e-12);
            if (k < 2) CHECK(nf <= norm_A(f, k + 1, 1.0));
        }
        CHECK(norm_boundary_A(f.trace(0), 0) <= norm_boundary_A(f.trace(0), 1));
        for (MixedFamily fam : {MixedFamily::C, MixedFamily::D, MixedFamily::B, MixedFamily::B_sup}) {
            MixedParams p;
            p.k = 1;
            p.ell = 1.0;
            p.rect = IndexPair{1, 2};
            // -3f is rounded entrywise and the difference quotients amplify that by 1/h^k
            CHECK(norm_mixed(-3.0 * f, fam, p) == doctest::Approx(3.0 * norm_mixed(f, fam, p)).epsilon(1e-9));
            CHECK(norm_mixed(f + g, fam, p) <= norm_mixed(f, fam, p) + norm_mixed(g, fam, p) + 1e-12);
        }
    }
}

TEST_CASE("heavier weights increase the norm away from the wall") {
    const Field far = Field::sample(kGrid, [](double, double x, double y) {
        return y >= 1.0 ? (y - 1.0) * (y - 1.0) * std::exp(-y) * (1.0 + 0.3 * std::cos(x)) : 0.0;
    });
    CHECK(norm_A(far, 0, 0.0) <= norm_A(far, 0, 1.0));
    CHECK(norm_A(far, 0, 1.0) <= norm_A(far, 0, 2.0));
}

TEST_CASE("homogeneous norms ignore constants") {
    const Field c = Field::sample(kGrid, [](double, double, double) { return 3.0; });
    CHECK(norm_A(c, 1, 0.0, true) <= 1e-10);
    CHECK(norm_A(c, 1, 0.0, false) > 1.0);
    CHECK((mixed_derivative(c, 0, 0, 0) - c).max_abs() == 0.0);
}

TEST_CASE("evaluate_norms reports every family") {
    std::mt19937_64 rng(7);
    const NormReport r = evaluate_norms(random_smooth(rng), 1, 1.0);
    CHECK(r.values.count(NormReport::key_A(0, 1.0)) == 1);
    CHECK(r.values.count(NormReport::key_A(1, 1.0)) == 1);
    CHECK(r.values.count(NormReport::key_C(1, 1.0)) == 1);
    CHECK(r.values.count(NormReport::key_D(1, 1.0)) == 1);
    for (const auto& [key, v] : r.values) CHECK(std::isfinite(v));
    CHECK(r.to_json().is_object());
}
