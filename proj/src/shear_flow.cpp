#include "prandtl/shear_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prandtl/errors.hpp"
#include "tridiag.hpp"

namespace prandtl {

using detail::solve_tridiag;

namespace {

constexpr double kPi = 3.14159265358979323846;

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on `panels` equal pieces. The tolerance is relative to a
// coarse estimate of the integral so tiny far-field values keep their digits.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        int panels = 8) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / panels;
    std::vector<double> fa(panels + 1), fm(panels);
    double scale = 0.0;
    for (int i = 0; i <= panels; ++i) fa[i] = f(a + i * h);
    for (int i = 0; i < panels; ++i) fm[i] = f(a + (i + 0.5) * h);
    for (int i = 0; i < panels; ++i) scale += std::abs(h / 6.0 * (fa[i] + 4.0 * fm[i] + fa[i + 1]));
    const double tol = std::max(rel_tol * scale, std::numeric_limits<double>::min());
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * h, hi = lo + h;
        const double whole = h / 6.0 * (fa[i] + 4.0 * fm[i] + fa[i + 1]);
        sum += simpson_rec(f, lo, hi, fa[i], fm[i], fa[i + 1], whole, tol / panels, 40);
    }
    return sum;
}

// int_0^{s_hi} (G(y-s) - G(y+s)) g(s) ds with the Gaussian heat kernel G at time t.
double odd_kernel(const std::function<double(double)>& g, double t, double y, double s_hi) {
    const double reach = 20.0 * std::sqrt(t);
    const double lo = std::max(0.0, y - reach), hi = std::min(s_hi, y + reach);
    if (!(hi > lo)) return 0.0;
    const double norm = 1.0 / (2.0 * std::sqrt(kPi * t));
    auto integrand = [&](double s) {
        const double z = y - s;
        return norm * std::exp(-z * z / (4.0 * t)) * (-std::expm1(-y * s / t)) * g(s);
    };
    return adaptive_simpson(integrand, lo, hi, 1e-11, 16);
}

// Catmull-Rom interpolant of grid samples on [0, Y_max].
std::function<double(double)> interpolant(const Profile& p, const GridSpec& g) {
    return [&p, h = g.dy(), n = p.size()](double s) {
        if (s <= 0.0) return p.front();
        const double u = s / h;
        std::size_t j = static_cast<std::size_t>(u);
        if (j >= n - 1) return p.back();
        const double r = u - static_cast<double>(j);
        const double p1 = p[j], p2 = p[j + 1];
        const double p0 = j > 0 ? p[j - 1] : 2.0 * p1 - p2;
        const double p3 = j + 2 < n ? p[j + 2] : 2.0 * p2 - p1;
        return p1 + 0.5 * r * (p2 - p0 + r * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + r * (3.0 * (p1 - p2) + p3 - p0)));
    };
}

void require_profile(const Profile& p, const GridSpec& g, const char* what) {
    if (p.size() != g.n_y) throw StructuralError(std::string(what) + ": profile length must equal n_y");
}

Field slices_to_field(const std::vector<Profile>& slices, const GridSpec& g) {
    Field f(g, FieldKind::y_profile);
    for (std::size_t it = 0; it < g.n_t; ++it) std::copy(slices[it].begin(), slices[it].end(), f.column(it, 0));
    return f;
}

}  // namespace

ShearProfile make_shear_profile(const Field& deficit, double beta, WallClosure closure, const Field* w1_exact) {
    if (deficit.kind() != FieldKind::y_profile) throw StructuralError("shear profile needs a y-profile field");
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    const GridSpec& g = deficit.grid();
    ShearProfile p;
    p.grid = g;
    p.beta = beta;
    p.deficit = deficit;
    p.uy = -d_y(deficit, 1);
    p.uyy = -d_y(deficit, 2);
    const double h = g.dy();
    if (closure == WallClosure::robin_ghost) {
        for (std::size_t it = 0; it < g.n_t; ++it) {
            const double d0 = deficit(it, 0, 0), d1 = deficit(it, 0, 1);
            p.uy(it, 0, 0) = beta * (1.0 - d0);
            p.uyy(it, 0, 0) = -(2.0 * d1 - 2.0 * d0 - 2.0 * h * (beta * d0 - beta)) / (h * h);
        }
    }
    p.uyyy = d_y(p.uyy, 1);
    p.ut = -d_t(deficit);
    p.uyt = d_t(p.uy);
    p.uyyt = d_t(p.uyy);
    p.u_s = deficit * -1.0;
    for (double& v : p.u_s.values()) v += 1.0;
    if (w1_exact) {
        p.w1 = *w1_exact;
    } else {
        p.w1 = p.uy - p.u_s * beta;
    }
    p.alpha = p.uyy / p.uy;
    p.alpha1 = p.uyt / p.uy;
    p.alpha2 = p.uyyt / p.uy;
    double m = std::numeric_limits<double>::infinity();
    for (double a : p.alpha.values()) m = std::min(m, std::isfinite(a) ? beta - a : -std::numeric_limits<double>::infinity());
    p.delta_s = m;
    return p;
}

ShearProfile shear_from_samples(const Field& u_s, double beta, WallClosure closure) {
    Field d = u_s * -1.0;
    for (double& v : d.values()) v += 1.0;
    return make_shear_profile(d, beta, closure);
}

Profile canonical_initial_w1(double sigma, double beta, const GridSpec& g) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    Profile w(g.n_y);
    for (std::size_t j = 0; j < g.n_y; ++j) w[j] = -beta * std::tanh(g.y(j) / sigma);
    return w;
}

std::function<double(double)> canonical_w1_deficit(double sigma, double beta) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    return [sigma, beta](double y) { return 2.0 * beta / (1.0 + std::exp(2.0 * y / sigma)); };
}

Profile heat_kernel_w1(const Profile& w1_0, double t, const GridSpec& g) {
    if (!(t > 0.0)) throw DomainError("heat_kernel_w1: t must be positive");
    require_profile(w1_0, g, "heat_kernel_w1");
    const double far = w1_0.back();
    Profile q0(w1_0.size());
    for (std::size_t j = 0; j < q0.size(); ++j) q0[j] = w1_0[j] - far;
    auto qf = interpolant(q0, g);
    Profile out(g.n_y);
    for (std::size_t j = 0; j < g.n_y; ++j) {
        const double y = g.y(j);
        out[j] = far * std::erf(y / (2.0 * std::sqrt(t))) + odd_kernel(qf, t, y, g.y_max);
    }
    return out;
}

Profile heat_kernel_w1_deficit(const std::function<double(double)>& q0, double beta, double t, const GridSpec& g) {
    if (!(t > 0.0)) throw DomainError("heat_kernel_w1: t must be positive");
    Profile out(g.n_y);
    for (std::size_t j = 0; j < g.n_y; ++j) {
        const double y = g.y(j);
        out[j] = beta * std::erfc(y / (2.0 * std::sqrt(t))) + odd_kernel(q0, t, y, g.y_max);
    }
    return out;
}

Profile recover_deficit(const Profile& q, double beta, const GridSpec& g) {
    if (!(beta > 0.0)) throw DomainError("recover_us: beta must be positive");
    require_profile(q, g, "recover_us");
    const double h = g.dy(), x = beta * h;
    const double decay = std::exp(-x);
    // int_0^h e^{-beta s} ds and int_0^h s e^{-beta s} ds, exact for the linear interpolant of q
    const double e0 = -std::expm1(-x) / beta;
    double e1;
    if (x < 0.1) {
        e1 = h * h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0 + x * x * x * x / 144.0);
    } else {
        e1 = (-std::expm1(-x) - x * decay) / (beta * beta);
    }
    Profile d(q.size());
    // Beyond Y_max q continues with its last local decay rate kappa >= 0, which gives
    // d(Y_max) = q(Y_max) / (beta + kappa) instead of truncating the integral.
    const double qn = q.back(), qm = q[q.size() - 2];
    double kappa = 0.0;
    if (qn != 0.0 && qm / qn > 1.0) kappa = std::log(qm / qn) / h;
    d.back() = qn / (beta + kappa);
    for (std::size_t j = q.size() - 1; j-- > 0;)
        d[j] = decay * d[j + 1] + q[j] * e0 + (q[j + 1] - q[j]) * e1 / h;
    return d;
}

Profile recover_us(const Profile& w1, double beta, const GridSpec& g) {
    require_profile(w1, g, "recover_us");
    Profile q(w1.size());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = w1[j] + beta;
    Profile d = recover_deficit(q, beta, g);
    for (double& v : d) v = 1.0 - v;
    return d;
}

ShearProfile solve_heat_robin_fd_deficit(const Profile& d0, double beta, const GridSpec& g) {
    if (!(beta > 0.0)) throw DomainError("solve_heat_robin_fd: beta must be positive");
    g.validate();
    require_profile(d0, g, "solve_heat_robin_fd");
    const std::size_t n = g.n_y - 1;  // unknowns 0..n-1, d(Y_max) = 0
    const double h = g.dy(), k = g.dt(), r = 0.5 * k / (h * h);
    std::vector<double> a(n, -r), b(n, 1.0 + 2.0 * r), c(n, -r);
    a[0] = 0.0;
    c[0] = -2.0 * r;
    b[0] = 1.0 + r * (2.0 + 2.0 * h * beta);
    std::vector<Profile> slices(g.n_t, Profile(g.n_y, 0.0));
    slices[0] = d0;
    double u0max = 0.0;
    for (double v : d0) u0max = std::max(u0max, std::abs(1.0 - v));
    std::vector<double> rhs(n);
    for (std::size_t it = 1; it < g.n_t; ++it) {
        const Profile& prev = slices[it - 1];
        rhs[0] = prev[0] + r * (2.0 * prev[1] - (2.0 + 2.0 * h * beta) * prev[0]) + k * 2.0 * beta / h;
        for (std::size_t j = 1; j < n; ++j) rhs[j] = prev[j] + r * (prev[j + 1] - 2.0 * prev[j] + prev[j - 1]);
        solve_tridiag(a, b, c, rhs);
        Profile& cur = slices[it];
        double umax = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            cur[j] = rhs[j];
            if (!std::isfinite(cur[j])) throw NumericalError("solve_heat_robin_fd: non-finite value");
            umax = std::max(umax, std::abs(1.0 - cur[j]));
        }
        cur[n] = 0.0;
        if (umax > 10.0 * std::max(u0max, 1e-300)) {
            std::ostringstream os;
            os << "solve_heat_robin_fd: max |u| grew to " << umax << " at step " << it << " (initial " << u0max << ")";
            throw NumericalError(os.str());
        }
    }
    return make_shear_profile(slices_to_field(slices, g), beta, WallClosure::robin_ghost);
}

ShearProfile solve_heat_robin_fd(const Profile& u0_s, double beta, const GridSpec& g) {
    require_profile(u0_s, g, "solve_heat_robin_fd");
    Profile d0(u0_s.size());
    for (std::size_t j = 0; j < d0.size(); ++j) d0[j] = 1.0 - u0_s[j];
    return solve_heat_robin_fd_deficit(d0, beta, g);
}

ShearProfile kernel_shear(const std::function<double(double)>& q0, double beta, const GridSpec& g) {
    g.validate();
    std::vector<Profile> d(g.n_t), w(g.n_t);
    for (std::size_t it = 0; it < g.n_t; ++it) {
        Profile q(g.n_y);
        if (it == 0) {
            for (std::size_t j = 0; j < g.n_y; ++j) q[j] = q0(g.y(j));
        } else {
            q = heat_kernel_w1_deficit(q0, beta, g.t(it), g);
        }
        d[it] = recover_deficit(q, beta, g);
        w[it] = q;
        for (double& v : w[it]) v -= beta;
    }
    Field w1 = slices_to_field(w, g);
    return make_shear_profile(slices_to_field(d, g), beta, WallClosure::robin_ghost, &w1);
}

Field solve_alpha_system(const Profile& alpha0, double beta, const GridSpec& g) {
    if (!(beta > 0.0)) throw DomainError("solve_alpha_system: beta must be positive");
    g.validate();
    require_profile(alpha0, g, "solve_alpha_system");
    const std::size_t n = g.n_y - 1;
    const double h = g.dy(), k = g.dt(), r = 0.5 * k / (h * h);
    std::vector<double> a(n, -r), b(n, 1.0 + 2.0 * r), c(n, -r);
    a[0] = 0.0;
    c[0] = -2.0 * r;
    b[0] = 1.0 + r * (2.0 + 2.0 * h * beta);
    Field out(g, FieldKind::y_profile);
    std::copy(alpha0.begin(), alpha0.end(), out.column(0, 0));
    double amax0 = 0.0;
    for (double v : alpha0) amax0 = std::max(amax0, std::abs(v));
    std::vector<double> rhs(n), flux(n), flux_old(n);
    for (std::size_t it = 1; it < g.n_t; ++it) {
        const double* prev = out.column(it - 1, 0);
        // (alpha^2)_y; at the wall the boundary relation gives alpha_y = beta alpha - alpha^2
        flux[0] = 2.0 * prev[0] * (beta * prev[0] - prev[0] * prev[0]);
        for (std::size_t j = 1; j < n; ++j) flux[j] = (prev[j + 1] * prev[j + 1] - prev[j - 1] * prev[j - 1]) / (2.0 * h);
        const double lag = prev[0] * prev[0];
        rhs[0] = prev[0] + r * (2.0 * prev[1] - (2.0 + 2.0 * h * beta) * prev[0]) + k * 2.0 * lag / h;
        for (std::size_t j = 1; j < n; ++j) rhs[j] = prev[j] + r * (prev[j + 1] - 2.0 * prev[j] + prev[j - 1]);
        for (std::size_t j = 0; j < n; ++j)
            rhs[j] += it == 1 ? k * flux[j] : k * (1.5 * flux[j] - 0.5 * flux_old[j]);
        solve_tridiag(a, b, c, rhs);
        double* cur = out.column(it, 0);
        for (std::size_t j = 0; j < n; ++j) {
            cur[j] = rhs[j];
            if (!std::isfinite(cur[j]) || std::abs(cur[j]) > 10.0 * std::max(amax0, 1.0)) {
                std::ostringstream os;
                os << "solve_alpha_system: blow-up at step " << it << ", node " << j;
                throw NumericalError(os.str());
            }
        }
        cur[n] = 0.0;
        flux_old = flux;
    }
    return out;
}

MarginReport check_monotonicity(const ShearProfile& p) {
    MarginReport r;
    const double inf = std::numeric_limits<double>::infinity();
    r.min_u = r.min_uy = r.min_beta_minus_alpha = inf;
    r.max_uyy = -inf;
    auto finite_or = [&](double v) { return std::isfinite(v) ? v : -inf; };
    for (std::size_t i = 0; i < p.u_s.size(); ++i) {
        r.min_u = std::min(r.min_u, finite_or(p.u_s.values()[i]));
        r.min_uy = std::min(r.min_uy, finite_or(p.uy.values()[i]));
        r.min_beta_minus_alpha = std::min(r.min_beta_minus_alpha, finite_or(p.beta - p.alpha.values()[i]));
        r.max_uyy = std::max(r.max_uyy, p.uyy.values()[i]);
    }
    // measured from u^s itself, not from the closure used for uy
    const double h = p.grid.dy();
    for (std::size_t it = 0; it < p.u_s.nt(); ++it) {
        const double* d = p.deficit.column(it, 0);
        // fourth-order one-sided stencil, so the stencil error stays below the scheme's
        const double uy0 = (25.0 * d[0] - 48.0 * d[1] + 36.0 * d[2] - 16.0 * d[3] + 3.0 * d[4]) / (12.0 * h);
        r.robin_residual = std::max(r.robin_residual, std::abs(uy0 - p.beta * (1.0 - d[0])));
    }
    return r;
}

std::vector<double> compatibility_residuals(const Profile& w1_0, const GridSpec& g, int orders) {
    require_profile(w1_0, g, "compatibility_residuals");
    std::vector<double> out;
    Profile cur = w1_0;
    const double h = g.dy();
    for (int j = 0; j < orders; ++j) {
        out.push_back(std::abs(cur[0]));
        if (cur.size() < 4) break;
        Profile next(cur.size());
        const std::size_t n = cur.size();
        next[0] = (2.0 * cur[0] - 5.0 * cur[1] + 4.0 * cur[2] - cur[3]) / (h * h);
        for (std::size_t i = 1; i + 1 < n; ++i) next[i] = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / (h * h);
        next[n - 1] = (2.0 * cur[n - 1] - 5.0 * cur[n - 2] + 4.0 * cur[n - 3] - cur[n - 4]) / (h * h);
        cur = std::move(next);
    }
    return out;
}

}  // namespace prandtl
