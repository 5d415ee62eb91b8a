#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "prandtl/errors.hpp"
#include "prandtl/shear_flow.hpp"

using namespace prandtl;

namespace {

const GridSpec kTall{201, 4, 201, 0.5, 2.0, 20.0};

}  // namespace

TEST_CASE("canonical datum vanishes at the wall and tends to -beta") {
    const Profile w = canonical_initial_w1(1.0, 2.0, kTall);
    CHECK(w.front() == doctest::Approx(0.0));
    CHECK(w.back() == doctest::Approx(-2.0).epsilon(1e-9));
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1]);
    const auto q = canonical_w1_deficit(1.0, 2.0);
    for (std::size_t i = 0; i < w.size(); i += 17) CHECK(q(kTall.y(i)) == doctest::Approx(w[i] + 2.0).epsilon(1e-9));
    CHECK_THROWS_AS(canonical_w1_deficit(0.0, 1.0), DomainError);
}

TEST_CASE("recover_deficit is exact for exponentials, including the tail") {
    const GridSpec g{4, 4, 401, 1.0, 1.0, 8.0};
    for (double beta : {0.5, 1.0, 10.0, 1000.0}) {
        for (double kappa : {0.5, 2.0}) {
            Profile q(g.n_y);
            for (std::size_t i = 0; i < g.n_y; ++i) q[i] = std::exp(-kappa * g.y(i));
            const Profile d = recover_deficit(q, beta, g);
            for (std::size_t i = 0; i < g.n_y; i += 20) {
                const double exact = q[i] / (beta + kappa);
                CHECK(std::abs(d[i] - exact) <= 0.1 * kappa * kappa * g.dy() * g.dy() * exact);
            }
        }
    }
    CHECK_THROWS_AS(recover_deficit(Profile(g.n_y, 0.0), -1.0, g), DomainError);
    CHECK_THROWS_AS(recover_deficit(Profile(3, 0.0), 1.0, g), StructuralError);
}

TEST_CASE("kernel shear satisfies the Robin condition and stays monotone") {
    const GridSpec g{11, 4, 401, 0.5, 2.0, 20.0};
    for (double beta : {0.5, 1.0, 5.0}) {
        const ShearProfile p = kernel_shear(canonical_w1_deficit(1.0, beta), beta, g);
        const MarginReport m = check_monotonicity(p);
        CHECK(m.robin_residual <= 1e-5);
        CHECK(m.all_positive());
        CHECK(m.max_uyy <= 1e-8);
        CHECK(p.delta_s > 0.0);
    }
}

TEST_CASE("finite differences agree with the kernel solution at second order") {
    auto error_on = [](std::size_t nt, std::size_t ny) {
        const GridSpec g{nt, 4, ny, 0.5, 2.0, 20.0};
        const GridSpec gk{6, 4, ny, 0.5, 2.0, 20.0};
        const ShearProfile k = kernel_shear(canonical_w1_deficit(1.0, 1.0), 1.0, gk);
        Profile d0(ny);
        for (std::size_t i = 0; i < ny; ++i) d0[i] = k.deficit(0, 0, i);
        const ShearProfile fd = solve_heat_robin_fd_deficit(d0, 1.0, g);
        double e = 0.0;
        const std::size_t stride = (nt - 1) / 5;
        for (std::size_t it = 0; it < 6; ++it)
            for (std::size_t i = 0; i < ny; ++i) e = std::max(e, std::abs(k.u_s(it, 0, i) - fd.u_s(it * stride, 0, i)));
        return e;
    };
    const double coarse = error_on(201, 101), fine = error_on(401, 201);
    CHECK(fine <= 1e-3);
    CHECK(coarse / fine >= 3.0);
}

TEST_CASE("u and deficit entry points agree") {
    const GridSpec g{101, 4, 201, 0.5, 2.0, 20.0};
    const Profile w = canonical_initial_w1(1.0, 1.0, g);
    const Profile u0 = recover_us(w, 1.0, g);
    Profile d0(u0.size());
    for (std::size_t i = 0; i < u0.size(); ++i) d0[i] = 1.0 - u0[i];
    const ShearProfile a = solve_heat_robin_fd(u0, 1.0, g);
    const ShearProfile b = solve_heat_robin_fd_deficit(d0, 1.0, g);
    CHECK((a.u_s - b.u_s).max_abs() <= 1e-10);
}

TEST_CASE("alpha system keeps the maximum principle") {
    const GridSpec g{401, 4, 201, 0.5, 2.0, 20.0};
    for (double sigma : {0.5, 1.0, 2.0}) {
        const ShearProfile p = kernel_shear(canonical_w1_deficit(sigma, 1.0), 1.0, GridSpec{4, 4, 201, 0.5, 2.0, 20.0});
        Profile a0(g.n_y);
        for (std::size_t i = 0; i < g.n_y; ++i) a0[i] = p.alpha(0, 0, i);
        const Field alpha = solve_alpha_system(a0, 1.0, g);
        const double bound = std::max(*std::max_element(a0.begin(), a0.end()), 0.0);
        double mx = -1e300;
        for (double v : alpha.values()) mx = std::max(mx, v);
        CHECK(mx <= bound + 1e-6);
    }
    CHECK_THROWS_AS(solve_alpha_system(Profile(201, 0.0), 0.0, g), DomainError);
}

TEST_CASE("compatibility residuals of the canonical datum") {
    const GridSpec g{4, 4, 801, 0.5, 2.0, 20.0};
    const auto r = compatibility_residuals(canonical_initial_w1(1.0, 1.0, g), g, 3);
    REQUIRE(r.size() == 3);
    CHECK(r[0] <= 1e-12);
    CHECK(r[1] <= 1e-2);  // tanh is odd, so every even derivative vanishes at the wall
}

TEST_CASE("heat kernel rejects t <= 0") {
    CHECK_THROWS_AS(heat_kernel_w1(canonical_initial_w1(1.0, 1.0, kTall), 0.0, kTall), DomainError);
}
