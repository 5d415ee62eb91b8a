#include "prandtl/nash_moser_driver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/parallel.hpp"
#include "prandtl/weighted_norms.hpp"

namespace prandtl {

double IterationConfig::theta(int n) const { return std::sqrt(theta0 * theta0 + static_cast<double>(n)); }

void IterationConfig::validate() const {
    if (!(theta0 >= 3.0)) {
        std::ostringstream os;
        os << "iteration.theta0 = " << theta0 << " must be at least 3";
        throw ConfigError(os.str());
    }
    if (k0 < 0) throw ConfigError("iteration.k0 must be non-negative");
    if (!(epsilon > 0.0)) throw ConfigError("iteration.epsilon must be positive");
    if (!(delta >= 0.0)) throw ConfigError("iteration.delta must be non-negative");
    if (max_iters < 1) throw ConfigError("iteration.max_iters must be at least 1");
    if (!(residual_tol > 0.0)) throw ConfigError("iteration.residual_tol must be positive");
    if (norm_k < 0 || norm_k > 2) throw ConfigError("iteration.norm_k must be 0, 1 or 2");
    if (max_backoffs < 0) throw ConfigError("iteration.max_backoffs must be non-negative");
    if (correction_sweeps < 0) throw ConfigError("iteration.correction_sweeps must be non-negative");
    try {
        grid.validate();
    } catch (const StructuralError& e) {
        throw ConfigError(std::string("iteration.grid: ") + e.what());
    }
    // theta_n increases, so the last schedule value is the binding one.
    const double th = theta(max_iters);
    if (1.0 / th < 2.0 * grid.max_spacing()) {
        std::ostringstream os;
        os << "iteration.theta0: theta_" << max_iters << " = " << th << " puts 1/theta below twice the grid spacing "
           << grid.max_spacing();
        throw ConfigError(os.str());
    }
    if (grid.n_y < static_cast<std::size_t>(2 * k0 + 4)) {
        std::ostringstream os;
        os << "iteration.k0 = " << k0 << " needs n_y >= " << 2 * k0 + 4 << " for " << 2 * k0
           << " y-derivatives, got " << grid.n_y;
        throw StructuralError(os.str());
    }
}

namespace {

GridSpec slice_grid(const GridSpec& g) {
    GridSpec s = g;
    s.n_t = 1;
    return s;
}

// Weighted L2_{x,y} norm of time slice it; a boundary trace gives L2_x.
double slice_norm(const Field& f, std::size_t it, double ell) {
    const GridSpec& g = f.grid();
    const std::vector<double> wy = f.ny() > 1 ? trapezoid_weights(f.ny(), g.dy()) : std::vector<double>{1.0};
    double sum = 0.0;
    for (std::size_t ix = 0; ix < f.nx(); ++ix)
        for (std::size_t iy = 0; iy < f.ny(); ++iy) {
            const double y = f.ny() > 1 ? g.y(iy) : 0.0;
            const double v = f(it, ix, iy);
            sum += g.dx() * wy[iy] * std::pow(1.0 + y * y, ell) * v * v;
        }
    return std::sqrt(sum);
}

// Slice of an interior field at time index it.
Field slice_at(const Field& f, std::size_t it) {
    Field out(slice_grid(f.grid()));
    const std::size_t n = f.nx() * f.ny();
    std::copy(f.values().begin() + static_cast<long>(it * n), f.values().begin() + static_cast<long>((it + 1) * n),
              out.values().begin());
    return out;
}

// y-profile column at time index it copied along x into a slice.
Field profile_slice(const Field& prof, std::size_t it, const GridSpec& g) {
    Field out(slice_grid(g));
    for (std::size_t ix = 0; ix < g.n_x; ++ix)
        for (std::size_t iy = 0; iy < g.n_y; ++iy) out(0, ix, iy) = prof(it, 0, iy);
    return out;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// max over (t,x) of |d_y f - beta f| at y = 0 with the one-sided second-order stencil.
double wall_robin_residual(const Field& f, double beta) {
    const double h = f.grid().dy();
    double r = 0.0;
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const double* c = f.column(it, ix);
            const double dy0 = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h);
            r = std::max(r, std::abs(dy0 - beta * c[0]));
        }
    return r;
}

double wall_robin_scale(const Field& f, double beta) {
    const double h = f.grid().dy();
    double s = 0.0;
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const double* c = f.column(it, ix);
            s = std::max({s, std::abs((-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h)), beta * std::abs(c[0])});
        }
    return s;
}

// Second difference for the recursion. The end values come from the cubic
// through the four nearest interior values: their O(h^4) error stays O(h^2)
// after the next pass divides by h^2.
Field dyy_recursion(const Field& f) {
    Field out(f.grid(), f.kind());
    const double h = f.grid().dy();
    const std::size_t ny = f.ny();
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const double* c = f.column(it, ix);
            double* o = out.column(it, ix);
            for (std::size_t j = 1; j + 1 < ny; ++j) o[j] = (c[j + 1] - 2.0 * c[j] + c[j - 1]) / (h * h);
            o[0] = 4.0 * o[1] - 6.0 * o[2] + 4.0 * o[3] - o[4];
            o[ny - 1] = 4.0 * o[ny - 2] - 6.0 * o[ny - 3] + 4.0 * o[ny - 4] - o[ny - 5];
        }
    return out;
}

// Wall value from the one-sided Robin relation (-3 f0 + 4 f1 - f2) / 2h = beta f0.
void impose_robin_wall(Field& f, double beta) {
    const double h = f.grid().dy();
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            double* c = f.column(it, ix);
            c[0] = (4.0 * c[1] - c[2]) / (3.0 + 2.0 * h * beta);
        }
}

// First difference for the recursion: Robin value at the wall, one-sided at the far end.
Field dy_recursion(const Field& f, double beta) {
    Field out = d_y(f, 1);
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) out(it, ix, 0) = beta * f(it, ix, 0);
    return out;
}

}  // namespace

Field sample_initial(const GridSpec& g, const std::function<double(double, double)>& f) {
    Field out(slice_grid(g));
    for (std::size_t ix = 0; ix < g.n_x; ++ix)
        for (std::size_t iy = 0; iy < g.n_y; ++iy) out(0, ix, iy) = f(g.x(ix), g.y(iy));
    return out;
}

Field initial_perturbation(const GridSpec& g, double sigma, double beta, double eps, double t_ref) {
    // phi = u_yy = u_t at t_ref is the Robin lift of w1_t = q_yy:
    // phi = e^{beta y} int_inf^y e^{-beta s} q_yy ds = -recover_deficit(q_yy), with q = w1 + beta.
    // Then phi_y - beta phi = q_yy, which vanishes at the wall because w1(t, 0) = 0.
    // The odd ghost 2 beta - q(h) makes that exact, and the lift never forms beta^2 d,
    // which would cancel catastrophically for large beta.
    const Profile q = heat_kernel_w1_deficit(canonical_w1_deficit(sigma, beta), beta, t_ref, g);
    const double h = g.dy();
    const std::size_t n = g.n_y;
    Profile qyy(n);
    for (std::size_t iy = 0; iy < n; ++iy) {
        if (iy == 0)
            qyy[iy] = 0.0;
        else if (iy + 1 == n)
            qyy[iy] = (2.0 * q[iy] - 5.0 * q[iy - 1] + 4.0 * q[iy - 2] - q[iy - 3]) / (h * h);
        else
            qyy[iy] = (q[iy + 1] - 2.0 * q[iy] + q[iy - 1]) / (h * h);
    }
    const Profile lift = recover_deficit(qyy, beta, g);
    std::vector<double> phi(n);
    double peak = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
        // The taper exp(-(2y/Y_max)^8) is flat to seventh order at the wall and keeps
        // the data away from Y_max, where the truncated tail spoils u^s_yy.
        const double r = 2.0 * g.y(iy) / g.y_max;
        phi[iy] = -std::exp(-std::pow(r, 8)) * lift[iy];
        peak = std::max(peak, std::abs(phi[iy]));
    }
    if (!(peak > 0.0)) throw DomainError("initial_perturbation: shear has no curvature");
    Field out(slice_grid(g));
    for (std::size_t ix = 0; ix < g.n_x; ++ix) {
        const double c = eps * std::cos(2.0 * std::numbers::pi * g.x(ix) / g.x_len) / peak;
        for (std::size_t iy = 0; iy < g.n_y; ++iy) out(0, ix, iy) = c * phi[iy];
    }
    return out;
}

Field residual_operator(const Field& p, const Field& v, const ShearProfile& shear) {
    const Field us = shear.u_s.broadcast_x(), usy = shear.uy.broadcast_x();
    return d_t(p) + (us + p) * d_x(p) + v * (usy + d_y(p, 1)) - d_y(p, 2);
}

Field linearized_operator(const Field& du, const Field& dv, const Field& pb, const Field& vb,
                          const ShearProfile& shear) {
    const Field us = shear.u_s.broadcast_x(), usy = shear.uy.broadcast_x();
    return d_t(du) + (us + pb) * d_x(du) + vb * d_y(du, 1) + du * d_x(pb) + dv * (usy + d_y(pb, 1)) - d_y(du, 2);
}

ZerothOrder zeroth_order(const ShearProfile& shear, const Field& u_tilde0, int k0) {
    const GridSpec& g = shear.grid;
    if (k0 < 0) throw StructuralError("zeroth_order: k0 must be non-negative");
    if (g.n_y < static_cast<std::size_t>(std::max(2 * k0 + 4, 6))) {
        std::ostringstream os;
        os << "zeroth_order: n_y = " << g.n_y << " cannot resolve " << 2 * k0 << " y-derivatives (needs "
           << 2 * k0 + 4 << ")";
        throw StructuralError(os.str());
    }
    if (u_tilde0.nt() != 1 || u_tilde0.nx() != g.n_x || u_tilde0.ny() != g.n_y)
        throw StructuralError("zeroth_order: initial perturbation must be a t = 0 slice on the shear grid");
    const double robin = wall_robin_residual(u_tilde0, shear.beta);
    const double scale = wall_robin_scale(u_tilde0, shear.beta);
    if (robin > 0.05 * scale + 1e-14) {
        std::ostringstream os;
        os << "zeroth_order: initial perturbation violates the Robin condition, max |u_y - beta u| = " << robin;
        throw DomainError(os.str());
    }

    // Shear time derivatives at t = 0: d_t^m u^s = d_y^{2m} u^s. Every one of
    // them, and every d_t^j of the perturbation, satisfies f_y = beta f at the wall.
    const double beta = shear.beta;
    std::vector<Field> s, sy;
    s.push_back(profile_slice(shear.u_s, 0, g));
    sy.push_back(profile_slice(shear.uy, 0, g));
    for (int m = 1; m <= k0; ++m) {
        s.push_back(m == 1 ? -dyy_recursion(profile_slice(shear.deficit, 0, g)) : dyy_recursion(s.back()));
        sy.push_back(dy_recursion(s.back(), beta));
    }

    ZerothOrder z;
    std::vector<Field>& a = z.dt_slices;
    std::vector<Field>& b = z.dt_v_slices;
    a.push_back(u_tilde0);
    b.push_back(-cumulative_integral(d_x(u_tilde0)));
    for (int j = 1; j <= k0; ++j) {
        Field next = dyy_recursion(a[j - 1]);
        for (int m = 0; m <= j - 1; ++m) {
            const double c = binom(j - 1, m);
            const Field& al = a[j - 1 - m];
            next -= c * ((s[m] + a[m]) * d_x(al) + b[m] * (sy[j - 1 - m] + dy_recursion(al, beta)));
        }
        impose_robin_wall(next, beta);
        a.push_back(next);
        b.push_back(-cumulative_integral(d_x(next)));
    }

    z.p0 = Field(g);
    z.v0 = Field(g);
    const std::size_t n = g.n_x * g.n_y;
    for (std::size_t it = 0; it < g.n_t; ++it) {
        const double t = g.t(it);
        double c = 1.0;
        for (int j = 0; j <= k0; ++j) {
            if (j > 0) c *= t / j;
            for (std::size_t k = 0; k < n; ++k) {
                z.p0.values()[it * n + k] += c * a[j].values()[k];
                z.v0.values()[it * n + k] += c * b[j].values()[k];
            }
        }
    }
    z.f_a = residual_operator(z.p0, z.v0, shear);
    z.f_a.require_finite("zeroth_order");
    return z;
}

nlohmann::json IterationRecord::to_json() const {
    return {{"n", n},
            {"theta", theta},
            {"dtheta", dtheta},
            {"du_norm", du_norm},
            {"e_norm", e_norm},
            {"f_norm", f_norm},
            {"residual", residual},
            {"guard_margin", guard_margin},
            {"min_uy", min_uy},
            {"robin_residual", robin_residual},
            {"audit_increment", audit_increment},
            {"audit_residual", audit_residual},
            {"defect_sum", defect_sum},
            {"telescoping", telescoping},
            {"reconstruction", reconstruction}};
}

IterationState start_iteration(const IterationConfig& cfg, const ShearProfile& shear, const Field& u_tilde0) {
    if (!(shear.grid == cfg.grid)) throw StructuralError("start_iteration: shear grid differs from the iteration grid");
    ZerothOrder z = zeroth_order(shear, u_tilde0, cfg.k0);
    IterationState st;
    st.n = 0;
    st.theta_n = cfg.theta(0);
    const GridSpec& g = cfg.grid;
    st.p = z.p0;
    st.v = z.v0;
    st.p0 = std::move(z.p0);
    st.v0 = std::move(z.v0);
    st.du_sum = Field(g);
    st.delta_u = Field(g);
    st.delta_v = Field(g);
    st.e_prior = Field(g);
    st.e_last = Field(g);
    st.f_sum = Field(g);
    st.defect_sum = Field(g);
    st.f_n = Field(g);
    st.residual = z.f_a;
    st.f_a = std::move(z.f_a);
    return st;
}

MollifiedBackground mollify_background(const IterationState& st, const ShearProfile& shear, double theta,
                                       ShiftSign sign, double delta) {
    MollifiedBackground m;
    m.p_theta = smooth_Su(st.p, theta, sign);
    m.v_theta = smooth_Sv(st.v, theta, sign);
    m.bg = build_background_from_perturbation(m.p_theta, m.v_theta, shear, delta);
    return m;
}

Field force_update(const IterationState& st, const IterationConfig& cfg) {
    const double th = cfg.theta(st.n);
    if (st.n == 0) return -smooth_S(st.f_a, th, cfg.shift);
    const double th_prev = cfg.theta(st.n - 1);
    const Field carry = st.e_prior + st.f_a;
    return smooth_S(carry, th_prev, cfg.shift) - smooth_S(carry, th, cfg.shift) - smooth_S(st.e_last, th, cfg.shift);
}

void iterate_once(IterationState& st, const IterationConfig& cfg, const ShearProfile& shear, RunLog* log) {
    const int n = st.n;
    const double th = cfg.theta(n);
    st.theta_n = th;
    MollifiedBackground mb = mollify_background(st, shear, th, cfg.shift, cfg.delta);

    const Field f = force_update(st, cfg);
    SolverOptions opt;
    opt.energy_ell = cfg.norm_ell;
    opt.log = log;
    Field du = recover_u_from_wall(solve_case_I(mb.bg, f, opt).w, mb.bg);
    Field dv = recover_v(du);
    for (int sweep = 0; sweep < cfg.correction_sweeps; ++sweep) {
        const Field r = f - linearized_operator(du, dv, mb.p_theta, mb.v_theta, shear);
        const Field c = recover_u_from_wall(solve_case_I(mb.bg, r, opt).w, mb.bg);
        du += c;
        dv = recover_v(du);
    }

    const Field lin = linearized_operator(du, dv, mb.p_theta, mb.v_theta, shear);
    const Field defect = lin - f;
    const Field q = st.p - mb.p_theta;
    const Field e1 = du * d_x(du) + dv * d_y(du, 1);
    const Field e2 = d_x(q) * du + q * d_x(du) + (st.v - mb.v_theta) * d_y(du, 1) + dv * d_y(q, 1);
    const Field e = e1 + e2;

    const Field residual_old = st.residual;
    st.p += du;
    st.v += dv;
    st.du_sum += du;
    st.residual = residual_operator(st.p, st.v, shear);
    st.residual.require_finite("iterate_once residual");
    st.defect_sum += defect;
    st.f_sum += f;

    IterationRecord r;
    r.n = n;
    r.theta = th;
    r.dtheta = cfg.dtheta(n);
    r.du_norm = norm_A(du, cfg.norm_k, cfg.norm_ell);
    r.e_norm = norm_A(e, cfg.norm_k, cfg.norm_ell);
    r.f_norm = norm_A(f, cfg.norm_k, cfg.norm_ell);
    r.residual = norm_A(st.residual, cfg.norm_k, cfg.norm_ell);
    r.guard_margin = mb.bg.delta;
    double min_uy = mb.bg.u_y.values().empty() ? 0.0 : mb.bg.u_y.values()[0];
    for (double x : mb.bg.u_y.values()) min_uy = std::min(min_uy, x);
    r.min_uy = min_uy;
    r.robin_residual = wall_robin_residual(du, shear.beta);
    r.audit_increment = (st.residual - residual_old - lin - e).max_abs();
    const Field carried = st.e_prior + st.e_last + st.f_a;  // sum_{j<n} e_j + f^a
    r.audit_residual = (st.residual - e - (carried - smooth_S(carried, th, cfg.shift)) - st.defect_sum).max_abs();
    r.defect_sum = st.defect_sum.max_abs();
    r.telescoping = (st.f_sum + smooth_S(st.e_prior + st.e_last, th, cfg.shift) + smooth_S(st.f_a, th, cfg.shift))
                        .max_abs();
    r.reconstruction = (st.p - (st.p0 + st.du_sum)).max_abs();

    // Guard on the updated, unmollified state: u_y must stay positive.
    const Field uy_new = shear.uy.broadcast_x() + d_y(st.p, 1);
    double worst = uy_new.values()[0];
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < uy_new.size(); ++i)
        if (uy_new.values()[i] < worst) worst = uy_new.values()[i], worst_i = i;
    if (worst <= 0.0) {
        const GridSpec& g = cfg.grid;
        const std::size_t iy = worst_i % g.n_y, ix = (worst_i / g.n_y) % g.n_x, it = worst_i / (g.n_y * g.n_x);
        std::ostringstream os;
        os << "iterate " << n + 1 << " loses monotonicity: u_y = " << worst;
        throw MonotonicityError(os.str(), it, ix, iy, worst);
    }

    if (n >= 1) st.e_prior += st.e_last;
    st.e_last = e;
    st.f_n = f;
    st.delta_u = du;
    st.delta_v = dv;
    st.records.push_back(r);
    st.n = n + 1;
    st.theta_n = cfg.theta(st.n);
}

nlohmann::json ConvergenceReport::to_json() const {
    nlohmann::json j;
    j["converged"] = converged;
    j["diverged"] = diverged;
    j["reason"] = reason;
    j["epsilon_used"] = epsilon_used;
    j["backoffs"] = backoffs;
    j["initial_residual"] = initial_residual;
    j["final_residual"] = final_residual;
    j["relative_residual"] = initial_residual > 0.0 ? final_residual / initial_residual : 0.0;
    j["monotone_after_2"] = monotone_after_2;
    j["iterations"] = iterations;
    j["rate_fit"] = {{"slope", rate_fit.slope}, {"intercept", rate_fit.intercept}, {"residual", rate_fit.residual}};
    j["robin_relative"] = robin_relative;
    nlohmann::json per_n = nlohmann::json::object();
    for (const char* key : {"n", "theta", "dtheta", "du_norm", "e_norm", "f_norm", "residual", "guard_margin",
                            "min_uy", "robin_residual", "audit_increment", "audit_residual", "defect_sum",
                            "telescoping", "reconstruction"}) {
        nlohmann::json arr = nlohmann::json::array();
        for (const IterationRecord& r : records) arr.push_back(r.to_json()[key]);
        per_n[key] = arr;
    }
    j["per_n"] = per_n;
    return j;
}

ConvergenceReport run_iteration(const IterationConfig& cfg, const ShearProfile& shear,
                                const std::function<Field(double)>& data, RunLog* log) {
    cfg.validate();
    ConvergenceReport rep;
    double eps = cfg.epsilon;
    for (int attempt = 0;; ++attempt) {
        const Field u0 = data(eps);
        IterationState st = start_iteration(cfg, shear, u0);
        rep = ConvergenceReport{};
        rep.epsilon_used = eps;
        rep.backoffs = attempt;
        rep.initial_residual = norm_A(st.residual, cfg.norm_k, cfg.norm_ell);
        rep.final_residual = rep.initial_residual;
        if (!(rep.initial_residual > 0.0)) {
            rep.converged = true;
            rep.reason = "initial residual is zero";
            rep.final_state = std::move(st);
            return rep;
        }
        bool restart = false;
        int rising = 0;
        double prev = rep.initial_residual;
        while (st.n < cfg.max_iters) {
            try {
                iterate_once(st, cfg, shear, log);
            } catch (const MonotonicityError& e) {
                if (st.n == 0 && attempt < cfg.max_backoffs) {
                    if (log) {
                        std::ostringstream os;
                        os << "guard failed at n = 0 with epsilon = " << eps << ", halving: " << e.what();
                        log->warn(os.str());
                    }
                    restart = true;
                } else {
                    rep.diverged = true;
                    rep.reason = std::string("monotonicity guard: ") + e.what();
                }
                break;
            } catch (const NumericalError& e) {
                rep.diverged = true;
                rep.reason = std::string("numerical failure: ") + e.what();
                break;
            }
            const double res = st.records.back().residual;
            rep.final_residual = res;
            if (res <= cfg.residual_tol * rep.initial_residual) {
                rep.converged = true;
                rep.reason = "residual below tolerance";
                break;
            }
            rising = res >= prev ? rising + 1 : 0;
            prev = res;
            if (rising >= 5) {
                rep.diverged = true;
                rep.reason = "residual did not decrease over 5 consecutive steps";
                break;
            }
        }
        if (restart) {
            eps *= 0.5;
            continue;
        }
        if (!rep.converged && !rep.diverged) rep.reason = "max_iters reached";
        rep.iterations = st.n;
        rep.records = st.records;
        rep.monotone_after_2 = rep.records.size() >= 3;
        for (std::size_t i = 2; i < rep.records.size(); ++i)
            if (!(rep.records[i].residual < rep.records[i - 1].residual)) rep.monotone_after_2 = false;
        std::vector<double> xs, ys;
        for (const IterationRecord& r : rep.records)
            if (r.n >= 2) {
                xs.push_back(std::pow(r.theta, 3.0 - cfg.k_tilde) * r.dtheta);
                ys.push_back(r.du_norm);
            }
        rep.rate_fit = fit_loglog(xs, ys);
        const double robin = wall_robin_residual(st.p, shear.beta);
        const double scale = wall_robin_scale(st.p, shear.beta);
        rep.robin_relative = scale > 0.0 ? robin / scale : 0.0;
        rep.final_state = std::move(st);
        return rep;
    }
}

ConvergenceReport run_iteration(const IterationConfig& cfg, const ShearProfile& shear, double sigma, RunLog* log) {
    const GridSpec g = cfg.grid;
    const double beta = shear.beta;
    return run_iteration(
        cfg, shear, [g, sigma, beta](double eps) { return initial_perturbation(g, sigma, beta, eps); }, log);
}

ShearProfile canonical_shear(const GridSpec& g, double sigma, double beta) {
    return kernel_shear(canonical_w1_deficit(sigma, beta), beta, g);
}

nlohmann::json StabilityReport::to_json() const {
    return {{"data_gap", data_gap},
            {"difference_norm", difference_norm},
            {"data_functional", data_functional},
            {"fitted_constant", fitted_constant},
            {"linear_mismatch", linear_mismatch},
            {"both_converged", both_converged},
            {"note", note}};
}

StabilityReport stability_experiment(double eps1, double eps2, const ShearProfile& shear, double sigma,
                                     const IterationConfig& cfg, RunLog* log) {
    IterationConfig c1 = cfg, c2 = cfg;
    c1.epsilon = eps1;
    c2.epsilon = eps2;
    c1.max_backoffs = c2.max_backoffs = 0;  // a back-off would silently change the data
    const auto policy = thread_count() > 1 ? std::launch::async : std::launch::deferred;
    auto r1 = std::async(policy, [&] { return run_iteration(c1, shear, sigma, log); });
    ConvergenceReport b = run_iteration(c2, shear, sigma, log);
    ConvergenceReport a = r1.get();

    StabilityReport rep;
    rep.both_converged = !a.diverged && !b.diverged;
    if (!rep.both_converged) rep.note = "run diverged: " + (a.diverged ? a.reason : b.reason);
    const Field u0_1 = initial_perturbation(cfg.grid, sigma, shear.beta, eps1);
    const Field u0_2 = initial_perturbation(cfg.grid, sigma, shear.beta, eps2);
    rep.data_gap = slice_norm(u0_1 - u0_2, 0, cfg.norm_ell);

    const IterationState& s1 = a.final_state;
    const IterationState& s2 = b.final_state;
    const Field du = s1.p - s2.p;
    rep.difference_norm = norm_A(du, 0, cfg.norm_ell) + norm_boundary_A(du.trace(0), 0);

    const BackgroundState mid = build_background_from_perturbation(0.5 * (s1.p + s2.p), 0.5 * (s1.v + s2.v), shear);
    // w0 = 2 d_y((u0_1 - u0_2) / d_y(u0_1 + u0_2)): at t = 0 the midpoint slope is d_y(u0_1 + u0_2) / 2.
    const Field w0 = vorticity_of(du, mid);
    const double denom = std::max(std::sqrt(std::max(shear.beta - mid.c_eta, 0.0)), std::sqrt(std::max(cfg.delta, 1e-300)));
    rep.data_functional = slice_norm(w0, 0, cfg.norm_ell) + slice_norm(w0.trace(0), 0, 0.0) / denom;
    rep.fitted_constant = rep.data_functional > 0.0 ? rep.difference_norm / rep.data_functional : 0.0;

    SolverOptions opt;
    opt.energy_ell = cfg.norm_ell;
    opt.log = log;
    const VorticitySolution lin = solve_case_II(mid, w0, opt);
    const Field lin_u = recover_u_from_wall(lin.w, mid);
    const double dn = norm_A(du, 0, cfg.norm_ell);
    rep.linear_mismatch = dn > 0.0 ? norm_A(du - lin_u, 0, cfg.norm_ell) / dn : norm_A(lin_u, 0, cfg.norm_ell);
    return rep;
}

std::vector<ScheduleSum> schedule_sum_check(double theta0, int k_tilde, int j_max, double delta_theta) {
    std::vector<ScheduleSum> out;
    const auto theta = [theta0](int n) { return std::sqrt(theta0 * theta0 + n); };
    for (int k = k_tilde - 3; k <= k_tilde + 1; ++k) {
        ScheduleSum s;
        s.k = k;
        const double expo = std::max(k + 1 - k_tilde + delta_theta, 0.0);
        double sum = 0.0;
        for (int j = 1; j <= j_max; ++j) {
            const int m = j - 1;
            sum += std::pow(theta(m), k - k_tilde) * (theta(m + 1) - theta(m));
            s.ratios.push_back(sum / std::pow(theta(j), expo));
        }
        double lo = s.ratios.back(), hi = s.ratios.back();
        for (int j = j_max / 2; j <= j_max; ++j) {
            lo = std::min(lo, s.ratios[static_cast<std::size_t>(j - 1)]);
            hi = std::max(hi, s.ratios[static_cast<std::size_t>(j - 1)]);
        }
        s.drift = hi > 0.0 ? (hi - lo) / hi : 0.0;
        s.max_ratio = *std::max_element(s.ratios.begin(), s.ratios.end());
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json DirichletScan::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const DirichletPoint& p : points)
        pts.push_back({{"beta", p.beta}, {"trace_norm", p.trace_norm}, {"converged", p.converged},
                       {"diverged", p.diverged}, {"iterations", p.iterations}});
    return {{"points", pts}, {"epsilon", epsilon}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"fit_residual", fit.residual}};
}

DirichletScan dirichlet_limit(const std::vector<double>& betas, double sigma, const IterationConfig& cfg, RunLog* log) {
    // Every beta must see the same data amplitude: a first pass finds the epsilon each beta
    // accepts, then betas that backed off less rerun at the smallest one without back-off.
    const auto policy = thread_count() > 1 ? std::launch::async : std::launch::deferred;
    std::vector<ShearProfile> shears(betas.size());
    std::vector<ConvergenceReport> reps(betas.size());
    auto run_all = [&](const IterationConfig& c, const std::vector<bool>& todo) {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = 0; i < betas.size(); ++i)
            if (todo[i])
                jobs.push_back(std::async(policy, [&, i] {
                    if (shears[i].u_s.size() == 0) shears[i] = canonical_shear(c.grid, sigma, betas[i]);
                    reps[i] = run_iteration(c, shears[i], sigma, log);
                }));
        for (auto& j : jobs) j.get();
    };
    // Large beta leaves u^s_y tiny near Y_max, so the first pass may halve epsilon well
    // past the usual back-off budget, down to 1e-6.
    IterationConfig first = cfg;
    first.max_backoffs = std::max(cfg.max_backoffs, static_cast<int>(std::ceil(std::log2(cfg.epsilon / 1e-6))));
    run_all(first, std::vector<bool>(betas.size(), true));
    double eps = cfg.epsilon;
    for (const ConvergenceReport& r : reps)
        if (!r.diverged) eps = std::min(eps, r.epsilon_used);
    std::vector<bool> redo(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) redo[i] = reps[i].diverged || reps[i].epsilon_used != eps;
    if (std::find(redo.begin(), redo.end(), true) != redo.end()) {
        IterationConfig c = cfg;
        c.epsilon = eps;
        c.max_backoffs = 0;
        run_all(c, redo);
    }

    DirichletScan scan;
    scan.epsilon = eps;
    std::vector<double> bs, ns;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        DirichletPoint p;
        p.beta = betas[i];
        p.converged = reps[i].converged;
        p.diverged = reps[i].diverged;
        p.iterations = reps[i].iterations;
        p.trace_norm = norm_boundary_A(reps[i].final_state.p.trace(0), 0);
        scan.points.push_back(p);
        if (!p.diverged) {
            bs.push_back(p.beta);
            ns.push_back(p.trace_norm);
        }
    }
    scan.fit = fit_loglog(bs, ns);
    return scan;
}

}  // namespace prandtl
