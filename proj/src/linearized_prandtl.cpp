#include "prandtl/linearized_prandtl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/parallel.hpp"
#include "tridiag.hpp"

namespace prandtl {

using detail::BandSolver;
using detail::solve_cyclic;

BackgroundState build_background_from_perturbation(const Field& p, const Field& v_tilde, const ShearProfile& shear,
                                                   double delta_floor) {
    if (p.kind() != FieldKind::interior || !p.same_shape(v_tilde))
        throw StructuralError("build_background: perturbation and v must be interior fields of one shape");
    const GridSpec& g = p.grid();
    if (!(g == shear.grid)) throw StructuralError("build_background: shear profile lives on a different grid");
    const double beta = shear.beta;

    const Field us = shear.u_s.broadcast_x();
    const Field usy = shear.uy.broadcast_x(), usyy = shear.uyy.broadcast_x(), usyyy = shear.uyyy.broadcast_x();
    const Field usyt = shear.uyt.broadcast_x(), usyyt = shear.uyyt.broadcast_x();
    const Field py = d_y(p, 1), pyy = d_y(p, 2);
    const Field pyyy = d_y(pyy, 1);
    const Field pyx = d_x(py), pyyx = d_x(pyy);
    const Field pyt = d_t(py), pyyt = d_t(pyy);

    BackgroundState bg;
    bg.grid = g;
    bg.beta = beta;
    bg.p = p;
    bg.v_tilde = v_tilde;
    bg.u_tilde = us + p;
    bg.u_y = usy + py;
    bg.u_yy = usyy + pyy;
    bg.eta = bg.u_yy / bg.u_y;
    bg.eta_bar = usyy / bg.u_y;
    const Field u_yt = usyt + pyt;
    bg.zeta = (u_yt + bg.u_tilde * pyx + v_tilde * bg.u_yy - (usyyy + pyyy)) / bg.u_y;

    bg.zeta1_tilde = Field(g, FieldKind::boundary_trace);
    bg.zeta2_tilde = Field(g, FieldKind::boundary_trace);
    double min_gap = std::numeric_limits<double>::infinity();
    std::size_t worst_it = 0, worst_ix = 0;
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix) {
            const double uy = bg.u_y(it, ix, 0), eta = bg.eta(it, ix, 0), eb = bg.eta_bar(it, ix, 0);
            const double ut = bg.u_tilde(it, ix, 0);
            bg.zeta1_tilde(it, ix, 0) = (usyyt(it, ix, 0) - eb * usyt(it, ix, 0)) / uy;
            bg.zeta2_tilde(it, ix, 0) = (pyyt(it, ix, 0) + ut * pyyx(it, ix, 0) - eta * u_yt(it, ix, 0) +
                                         eb * usyt(it, ix, 0) - eta * ut * pyx(it, ix, 0)) /
                                        uy;
            if (beta - eta < min_gap) {
                min_gap = beta - eta;
                worst_it = it;
                worst_ix = ix;
            }
        }
    for (std::size_t i = 0; i < bg.u_y.size(); ++i) {
        if (!(bg.u_y.values()[i] > 0.0)) {
            const std::size_t iy = i % g.n_y, ix = (i / g.n_y) % g.n_x, it = i / (g.n_y * g.n_x);
            std::ostringstream os;
            os << "background lost monotonicity: u_y = " << bg.u_y.values()[i] << " at (it=" << it << ", ix=" << ix
               << ", iy=" << iy << ")";
            throw MonotonicityError(os.str(), it, ix, iy, bg.u_y.values()[i]);
        }
    }
    if (!(min_gap >= delta_floor) || !(min_gap > 0.0)) {
        std::ostringstream os;
        os << "wall margin beta - eta = " << min_gap << " below floor " << delta_floor << " at (it=" << worst_it
           << ", ix=" << worst_ix << ")";
        throw MonotonicityError(os.str(), worst_it, worst_ix, 0, min_gap);
    }
    bg.delta = min_gap;
    bg.c_eta = bg.eta.max_abs();
    bg.zeta.require_finite("build_background: zeta");
    bg.zeta2_tilde.require_finite("build_background: zeta2");
    return bg;
}

BackgroundState build_background(const Field& u_tilde, const Field& v_tilde, const ShearProfile& shear,
                                 double delta_floor) {
    return build_background_from_perturbation(u_tilde - shear.u_s.broadcast_x(), v_tilde, shear, delta_floor);
}

nlohmann::json VorticitySolution::energy_json() const {
    nlohmann::json j;
    for (const auto& r : energy_log) {
        j["t"].push_back(r.t);
        j["interior"].push_back(r.interior);
        j["boundary"].push_back(r.boundary);
        j["total"].push_back(r.total());
    }
    return j;
}

namespace {

// Coefficients of one column at a (possibly fractional) time level.
struct Column {
    std::vector<double> v, eta, zeta, f;
    double gap = 1.0, eta0 = 0.0, zeta_wall = 0.0;
};

// Linear interpolation between slices ia and ib with weight lam on ib.
void load_column(const BackgroundState& bg, const Field& ft, std::size_t ia, std::size_t ib, double lam,
                 std::size_t ix, Column& c) {
    const std::size_t n = bg.grid.n_y;
    c.v.resize(n);
    c.eta.resize(n);
    c.zeta.resize(n);
    c.f.resize(n);
    auto mix = [lam](double a, double b) { return (1.0 - lam) * a + lam * b; };
    const double *va = bg.v_tilde.column(ia, ix), *vb = bg.v_tilde.column(ib, ix);
    const double *ea = bg.eta.column(ia, ix), *eb = bg.eta.column(ib, ix);
    const double *za = bg.zeta.column(ia, ix), *zb = bg.zeta.column(ib, ix);
    const double *fa = ft.column(ia, ix), *fb = ft.column(ib, ix);
    for (std::size_t j = 0; j < n; ++j) {
        c.v[j] = mix(va[j], vb[j]);
        c.eta[j] = mix(ea[j], eb[j]);
        c.zeta[j] = mix(za[j], zb[j]);
        c.f[j] = mix(fa[j], fb[j]);
    }
    c.eta0 = c.eta[0];
    c.gap = bg.beta - c.eta0;
    c.zeta_wall = mix(bg.zeta1_tilde(ia, ix, 0) + bg.zeta2_tilde(ia, ix, 0),
                      bg.zeta1_tilde(ib, ix, 0) + bg.zeta2_tilde(ib, ix, 0));
}

// out = A_y w + S (every row but the far-field one).
void apply_y(const Column& c, const double* w, double dy, double* out, std::size_t n) {
    std::vector<double> tail(n, 0.0);
    for (std::size_t j = n - 1; j-- > 0;) tail[j] = tail[j + 1] + 0.5 * dy * (w[j] + w[j + 1]);
    const double h2 = dy * dy, h = 2.0 * dy;
    out[0] = c.gap * ((-3.0 * w[0] + 4.0 * w[1] - w[2]) / h + 2.0 * c.eta0 * w[0] + c.zeta[0] * tail[0] + c.f[0]) -
             c.zeta_wall * w[0] / c.gap;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        out[j] = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / h2 - (c.v[j + 1] * w[j + 1] - c.v[j - 1] * w[j - 1]) / h +
                 2.0 * (c.eta[j + 1] * w[j + 1] - c.eta[j - 1] * w[j - 1]) / h +
                 (c.zeta[j + 1] * tail[j + 1] - c.zeta[j - 1] * tail[j - 1]) / h + (c.f[j + 1] - c.f[j - 1]) / h;
    }
    out[n - 1] = 0.0;
}

// Solves (I - kappa A_y) w = rhs + kappa S for one column; w and tail integrals are
// interleaved so that the nonlocal term stays banded.
void solve_y(const Column& c, double kappa, double dy, const double* rhs, double* w, std::size_t n) {
    BandSolver m(2 * n, 2, 4);
    std::vector<double> b(2 * n, 0.0);
    auto W = [](std::size_t j) { return 2 * j; };
    auto I = [](std::size_t j) { return 2 * j + 1; };
    const double h2 = dy * dy, h = 2.0 * dy;
    // wall row
    m.at(W(0), W(0)) = 1.0 - kappa * (c.gap * (-3.0 / h + 2.0 * c.eta0) - c.zeta_wall / c.gap);
    m.at(W(0), W(1)) = -kappa * c.gap * 4.0 / h;
    m.at(W(0), W(2)) = kappa * c.gap / h;
    m.at(W(0), I(0)) = -kappa * c.gap * c.zeta[0];
    b[W(0)] = rhs[0] + kappa * c.gap * c.f[0];
    for (std::size_t j = 1; j + 1 < n; ++j) {
        m.at(W(j), W(j)) = 1.0 + 2.0 * kappa / h2;
        m.at(W(j), W(j + 1)) = -kappa * (1.0 / h2 - c.v[j + 1] / h + 2.0 * c.eta[j + 1] / h);
        m.at(W(j), W(j - 1)) = -kappa * (1.0 / h2 + c.v[j - 1] / h - 2.0 * c.eta[j - 1] / h);
        m.at(W(j), I(j + 1)) = -kappa * c.zeta[j + 1] / h;
        m.at(W(j), I(j - 1)) = kappa * c.zeta[j - 1] / h;
        b[W(j)] = rhs[j] + kappa * (c.f[j + 1] - c.f[j - 1]) / h;
    }
    m.at(W(n - 1), W(n - 1)) = 1.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        m.at(I(j), I(j)) = 1.0;
        m.at(I(j), I(j + 1)) = -1.0;
        m.at(I(j), W(j)) = -0.5 * dy;
        m.at(I(j), W(j + 1)) = -0.5 * dy;
    }
    m.at(I(n - 1), I(n - 1)) = 1.0;
    if (!m.solve(b)) throw NumericalError("vorticity solve: singular column system");
    for (std::size_t j = 0; j < n; ++j) w[j] = b[W(j)];
}

// (I - kappa A_x) along one y-row, periodic in x; u holds u_tilde along the row.
void solve_x(const std::vector<double>& u, double kappa, double dx, std::vector<double>& row) {
    const std::size_t n = row.size();
    const double c = kappa / (2.0 * dx);
    std::vector<double> a(n), b(n, 1.0), cc(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = -c * u[(i + n - 1) % n];
        cc[i] = c * u[(i + 1) % n];
    }
    solve_cyclic(a, b, cc, row);
}

double interior_energy(const std::vector<double>& w, std::size_t nx, std::size_t ny, const GridSpec& g, double ell) {
    const std::vector<double> wy = trapezoid_weights(ny, g.dy());
    double s = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = g.y(j);
            s += g.dx() * wy[j] * std::pow(1.0 + y * y, ell) * w[ix * ny + j] * w[ix * ny + j];
        }
    return s;
}

}  // namespace

VorticitySolution solve_vorticity(const BackgroundState& bg, const Field& f_tilde, const Field* w0,
                                  const SolverOptions& opt) {
    const GridSpec& g = bg.grid;
    if (f_tilde.kind() != FieldKind::interior || f_tilde.grid() != g)
        throw StructuralError("solve_vorticity: forcing must be an interior field on the background grid");
    if (w0 && (w0->kind() != FieldKind::interior || w0->grid() != g))
        throw StructuralError("solve_vorticity: initial data must be an interior field on the background grid");
    f_tilde.require_finite("solve_vorticity: forcing");
    const std::size_t nt = g.n_t, nx = g.n_x, ny = g.n_y;
    const double k = g.dt(), dx = g.dx(), dy = g.dy();

    VorticitySolution sol;
    sol.w = Field(g);
    if (w0)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            std::copy_n(w0->column(0, ix), ny, sol.w.column(0, ix));
            sol.w(0, ix, ny - 1) = 0.0;
        }

    auto log_energy = [&](std::size_t it) {
        std::vector<double> slice(sol.w.column(it, 0), sol.w.column(it, 0) + nx * ny);
        EnergyRecord r;
        r.t = g.t(it);
        r.interior = interior_energy(slice, nx, ny, g, opt.energy_ell);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double w0v = sol.w(it, ix, 0);
            r.boundary += dx * w0v * w0v / (bg.beta - bg.eta(it, ix, 0));
        }
        sol.energy_log.push_back(r);
    };
    log_energy(0);

    std::vector<double> star(nx * ny), next(nx * ny);
    // x sweeps on every row but the far-field one: implicit solves (I - kappa A_x),
    // explicit applies (I + kappa A_x); u_tilde interpolated between slices ia and ib.
    auto x_rows = [&](const std::vector<double>& in, std::vector<double>& out, std::size_t ia, std::size_t ib,
                      double lam, double kappa, bool implicit) {
        parallel_for(ny - 1, [&](std::size_t j) {
            std::vector<double> u(nx), row(nx);
            for (std::size_t ix = 0; ix < nx; ++ix) {
                u[ix] = (1.0 - lam) * bg.u_tilde(ia, ix, j) + lam * bg.u_tilde(ib, ix, j);
                row[ix] = in[ix * ny + j];
            }
            if (implicit) {
                solve_x(u, kappa, dx, row);
            } else {
                std::vector<double> r2(nx);
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const std::size_t ip = (ix + 1) % nx, im = (ix + nx - 1) % nx;
                    r2[ix] = row[ix] - kappa * (u[ip] * row[ip] - u[im] * row[im]) / (2.0 * dx);
                }
                row.swap(r2);
            }
            for (std::size_t ix = 0; ix < nx; ++ix) out[ix * ny + j] = row[ix];
        });
        for (std::size_t ix = 0; ix < nx; ++ix) out[ix * ny + ny - 1] = 0.0;
    };

    for (std::size_t it = 1; it < nt; ++it) {
        const double* prev = sol.w.column(it - 1, 0);
        std::vector<double> cur(prev, prev + nx * ny);
        const int sub = (it == 1) ? std::max(opt.startup_substeps, 0) : 0;
        if (sub > 0) {
            // damped start: backward-Euler Lie splitting on sub equal pieces
            const double h = k / sub;
            for (int s = 0; s < sub; ++s) {
                const double lam = static_cast<double>(s + 1) / sub;
                x_rows(cur, star, it - 1, it, lam, h, true);
                parallel_for(nx, [&](std::size_t ix) {
                    Column c;
                    load_column(bg, f_tilde, it - 1, it, lam, ix, c);
                    solve_y(c, h, dy, star.data() + ix * ny, cur.data() + ix * ny, ny);
                });
            }
        } else {
            // Peaceman-Rachford: x implicit on the first half, y implicit on the second
            const double kappa = 0.5 * k;
            parallel_for(nx, [&](std::size_t ix) {
                Column c;
                load_column(bg, f_tilde, it - 1, it - 1, 0.0, ix, c);
                std::vector<double> ay(ny);
                apply_y(c, cur.data() + ix * ny, dy, ay.data(), ny);
                for (std::size_t j = 0; j < ny; ++j) star[ix * ny + j] = cur[ix * ny + j] + kappa * ay[j];
            });
            x_rows(star, next, it - 1, it, 0.5, kappa, true);
            x_rows(next, star, it - 1, it, 0.5, kappa, false);
            parallel_for(nx, [&](std::size_t ix) {
                Column c;
                load_column(bg, f_tilde, it, it, 0.0, ix, c);
                solve_y(c, kappa, dy, star.data() + ix * ny, cur.data() + ix * ny, ny);
            });
        }
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (!std::isfinite(cur[i])) {
                std::ostringstream os;
                os << "vorticity solve: non-finite value at step " << it;
                throw NumericalError(os.str());
            }
        }
        std::copy(cur.begin(), cur.end(), sol.w.column(it, 0));
        log_energy(it);
    }
    sol.w_boundary = sol.w.trace(0);
    sol.u = recover_u(sol.w, bg, opt.log);
    sol.v = recover_v(sol.u);
    return sol;
}

VorticitySolution solve_case_I(const BackgroundState& bg, const Field& f, const SolverOptions& opt) {
    if (!f.same_shape(bg.u_y)) throw StructuralError("solve_case_I: forcing shape does not match the background");
    return solve_vorticity(bg, f / bg.u_y, nullptr, opt);
}

VorticitySolution solve_case_II(const BackgroundState& bg, const Field& w0, const SolverOptions& opt) {
    return solve_vorticity(bg, Field(bg.grid), &w0, opt);
}

Field recover_u(const Field& w, const BackgroundState& bg, RunLog* log) {
    return -(bg.u_y * tail_integral(w, log));
}

Field recover_u_from_wall(const Field& w, const BackgroundState& bg) {
    if (!w.same_shape(bg.u_y)) throw StructuralError("recover_u_from_wall: shape does not match the background");
    const GridSpec& g = bg.grid;
    const Field inner = cumulative_integral(w);
    Field u(g);
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix) {
            const double g0 = w(it, ix, 0) / (bg.beta - bg.eta(it, ix, 0));
            for (std::size_t iy = 0; iy < g.n_y; ++iy) u(it, ix, iy) = bg.u_y(it, ix, iy) * (g0 + inner(it, ix, iy));
        }
    return u;
}

Field recover_v(const Field& u) { return -cumulative_integral(d_x(u)); }

Field vorticity_of(const Field& u, const BackgroundState& bg) { return d_y(u / bg.u_y, 1); }

ManufacturedCase manufactured_case(const GridSpec& g, double wall_offset) {
    g.validate();
    const double beta = 2.0, a = wall_offset;
    const double kx = 2.0 * std::acos(-1.0) / g.x_len;
    // background: u = 1 - e^{-y}(1 + 0.2 sin cos t)/2 with the matching v
    auto u = [=](double t, double x, double y) { return 1.0 - 0.5 * std::exp(-y) * (1.0 + 0.2 * std::sin(kx * x) * std::cos(t)); };
    auto uy = [=](double t, double x, double y) { return 0.5 * std::exp(-y) * (1.0 + 0.2 * std::sin(kx * x) * std::cos(t)); };
    auto ux = [=](double t, double x, double y) { return -0.1 * kx * std::exp(-y) * std::cos(kx * x) * std::cos(t); };
    auto v = [=](double t, double x, double y) { return 0.1 * kx * std::cos(kx * x) * std::cos(t) * (1.0 - std::exp(-y)); };
    auto eta = [=](double t, double x, double y) { return -1.0 + 0.3 * std::sin(kx * x) * std::exp(-y) * std::cos(t); };
    auto zeta = [=](double t, double x, double y) { return 0.3 * std::cos(kx * x) * std::exp(-y) * (1.0 + t); };
    auto zeta_wall = [=](double t, double x) { return 0.2 + 0.1 * std::sin(kx * x) * std::cos(t); };
    // exact vorticity t sin(kx)(a + y)e^{-y} and its tail integral
    auto w = [=](double t, double x, double y) { return t * std::sin(kx * x) * (a + y) * std::exp(-y); };
    auto wy = [=](double t, double x, double y) { return t * std::sin(kx * x) * (1.0 - a - y) * std::exp(-y); };
    auto tail = [=](double t, double x, double y) { return t * std::sin(kx * x) * (a + 1.0 + y) * std::exp(-y); };
    // int_0^y (a+s)e^{-s} ds and int_0^y (a+s)e^{-2s} ds
    auto P = [=](double y) { return a * (1.0 - std::exp(-y)) + 1.0 - (1.0 + y) * std::exp(-y); };
    auto Q = [=](double y) { return a * (1.0 - std::exp(-2.0 * y)) / 2.0 + (1.0 - (1.0 + 2.0 * y) * std::exp(-2.0 * y)) / 4.0; };
    auto flux = [=](double t, double x, double y) {
        return v(t, x, y) * w(t, x, y) - 2.0 * eta(t, x, y) * w(t, x, y) - zeta(t, x, y) * tail(t, x, y) - wy(t, x, y);
    };
    auto f_wall = [=](double t, double x) {
        const double s = std::sin(kx * x), c = std::cos(kx * x);
        const double gap = beta - eta(t, x, 0.0);
        const double wt = s * a, w0 = t * s * a;
        const double uwx = ux(t, x, 0.0) * w0 + u(t, x, 0.0) * t * kx * c * a;
        return (wt + uwx + zeta_wall(t, x) * w0 / gap) / gap - wy(t, x, 0.0) - 2.0 * eta(t, x, 0.0) * w0 -
               zeta(t, x, 0.0) * tail(t, x, 0.0);
    };
    auto f = [=](double t, double x, double y) {
        const double s = std::sin(kx * x), c = std::cos(kx * x);
        const double wt_int = s * P(y);
        // (u w)_x = t[(a+y)e^{-y}(k c (1 - e^{-y}/2)) - 0.1 k cos t sin(2kx)(a+y)e^{-2y}]
        const double uwx_int = t * kx * c * (P(y) - 0.5 * Q(y)) - 0.1 * t * kx * std::cos(t) * 2.0 * s * c * Q(y);
        return f_wall(t, x) + wt_int + uwx_int + flux(t, x, y) - flux(t, x, 0.0);
    };

    ManufacturedCase mc;
    BackgroundState& bg = mc.bg;
    bg.grid = g;
    bg.beta = beta;
    bg.u_tilde = Field::sample(g, u);
    bg.p = Field(g);
    bg.v_tilde = Field::sample(g, v);
    bg.u_y = Field::sample(g, uy);
    bg.u_yy = -bg.u_y;
    bg.eta = Field::sample(g, eta);
    bg.eta_bar = bg.eta;
    bg.zeta = Field::sample(g, zeta);
    bg.zeta1_tilde = Field::sample_trace(g, zeta_wall);
    bg.zeta2_tilde = Field(g, FieldKind::boundary_trace);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix) gap = std::min(gap, beta - bg.eta(it, ix, 0));
    bg.delta = gap;
    bg.c_eta = bg.eta.max_abs();
    mc.f_tilde = Field::sample(g, f);
    mc.w_exact = Field::sample(g, w);
    mc.u_exact = Field::sample(g, [=](double t, double x, double y) { return -uy(t, x, y) * tail(t, x, y); });
    return mc;
}

}  // namespace prandtl
