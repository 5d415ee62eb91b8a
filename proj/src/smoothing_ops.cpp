#include "prandtl/smoothing_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/parallel.hpp"
#include "prandtl/weighted_norms.hpp"

namespace prandtl {

const char* to_string(ShiftSign s) { return s == ShiftSign::past ? "past" : "future"; }
const char* to_string(ExtensionKind k) {
    switch (k) {
        case ExtensionKind::zero: return "zero";
        case ExtensionKind::even: return "even";
        case ExtensionKind::odd: return "odd";
    }
    return "?";
}

double Mollifier::bump(double tau) {
    if (std::abs(tau) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - tau * tau));
}

std::vector<double> Mollifier::weights(double h, double shift, int& r_min) const {
    const double reach = 1.0 / theta;
    r_min = static_cast<int>(std::floor((-reach - shift) / h));
    const int r_max = static_cast<int>(std::ceil((reach - shift) / h));
    std::vector<double> w(static_cast<std::size_t>(r_max - r_min + 1));
    double sum = 0.0;
    for (int r = r_min; r <= r_max; ++r) {
        const double v = bump(theta * (r * h + shift));
        w[static_cast<std::size_t>(r - r_min)] = v;
        sum += v;
    }
    if (!(sum > 0.0)) throw StructuralError("mollifier: no grid node inside the kernel support");
    for (double& v : w) v /= sum;
    return w;
}

void check_resolvable(const GridSpec& g, double theta) {
    if (!(theta > 0.0) || 1.0 / theta < 2.0 * g.max_spacing()) {
        std::ostringstream os;
        os << "mollifier scale 1/theta = " << 1.0 / theta << " is below twice the grid spacing "
           << g.max_spacing() << " (theta = " << theta << ")";
        throw StructuralError(os.str());
    }
}

namespace {

// Value beyond the last node from the quadratic through the last three.
inline double extrapolate(const double* in, long n, std::size_t stride, long m) {
    const double s = static_cast<double>(m - (n - 1));
    const double f0 = in[(n - 1) * stride], f1 = in[(n - 2) * stride], f2 = in[(n - 3) * stride];
    return f2 * s * (s + 1.0) / 2.0 - f1 * s * (s + 2.0) + f0 * (s + 1.0) * (s + 2.0) / 2.0;
}

enum class Low { zero, constant, even, odd };
enum class High { zero, constant, quadratic };

struct LineRule {
    std::vector<double> w;
    int r_min = 0;
    Low low = Low::zero;
    High high = High::zero;
    long band = 0;  // reflected band width in nodes (even/odd)
};

void conv_line(const double* in, double* out, long n, std::size_t stride, const LineRule& rule) {
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.w.size(); ++k) {
            const long m = i - (rule.r_min + static_cast<long>(k));
            double v;
            if (m >= 0 && m < n) {
                v = in[m * stride];
            } else if (m < 0) {
                const long j = -m;
                switch (rule.low) {
                    case Low::zero: v = 0.0; break;
                    case Low::constant: v = in[0]; break;
                    case Low::even: v = j < rule.band && j < n ? in[j * stride] : 0.0; break;
                    case Low::odd: v = j < rule.band && j < n ? -in[j * stride] : 0.0; break;
                    default: v = 0.0;
                }
            } else {
                switch (rule.high) {
                    case High::zero: v = 0.0; break;
                    case High::constant: v = in[(n - 1) * stride]; break;
                    case High::quadratic: v = extrapolate(in, n, stride, m); break;
                    default: v = 0.0;
                }
            }
            acc += rule.w[k] * v;
        }
        out[i * stride] = acc;
    }
}

void conv_periodic(const double* in, double* out, long n, std::size_t stride, const LineRule& rule) {
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.w.size(); ++k) {
            long m = (i - (rule.r_min + static_cast<long>(k))) % n;
            if (m < 0) m += n;
            acc += rule.w[k] * in[m * stride];
        }
        out[i * stride] = acc;
    }
}

// Number of nodes j >= 1 with j dy strictly inside the reflection band.
long band_nodes(double dy, double theta) {
    long j = 0;
    while ((j + 1) * dy < 1.0 / theta * (1.0 - 1e-12)) ++j;
    return j + 1;
}

}  // namespace

ExtendedField extend(const Field& f, ExtensionKind kind, double theta) {
    if (f.kind() != FieldKind::interior) throw StructuralError("extend: needs an interior field");
    const GridSpec& g = f.grid();
    check_resolvable(g, theta);
    const double dy = g.dy();
    ExtendedField e;
    e.pad = static_cast<std::size_t>(std::ceil(1.0 / (theta * dy))) + 1;
    GridSpec eg = g;
    eg.n_y = g.n_y + e.pad;
    eg.y_max = dy * static_cast<double>(eg.n_y - 1);
    e.values = Field(eg);
    const long band = band_nodes(dy, theta);
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix) {
            const double* c = f.column(it, ix);
            double* o = e.values.column(it, ix);
            std::copy(c, c + g.n_y, o + e.pad);
            for (std::size_t j = 1; j <= e.pad; ++j) {
                double v = 0.0;
                if (static_cast<long>(j) < band && j < g.n_y) {
                    if (kind == ExtensionKind::even) v = c[j];
                    if (kind == ExtensionKind::odd) v = -c[j];
                }
                o[e.pad - j] = v;
            }
        }
    return e;
}

Field smooth(const Field& f, const Mollifier& m, ExtensionKind kind) {
    if (f.kind() != FieldKind::interior) throw StructuralError("smooth: needs an interior field");
    const GridSpec& g = f.grid();
    check_resolvable(g, m.theta);
    const double reach = 1.0 / m.theta;
    const long nt = static_cast<long>(g.n_t), nx = static_cast<long>(g.n_x), ny = static_cast<long>(g.n_y);
    if (ny < 3) throw StructuralError("smooth: needs at least three y nodes");

    LineRule rt, rx, ry;
    rt.w = m.weights(g.dt(), m.t_shift == ShiftSign::past ? -reach : reach, rt.r_min);
    rx.w = m.weights(g.dx(), 0.0, rx.r_min);
    ry.w = m.weights(g.dy(), m.y_shift ? reach : 0.0, ry.r_min);
    const bool reflect = kind != ExtensionKind::zero;
    rt.low = reflect ? Low::constant : Low::zero;
    rt.high = reflect ? High::constant : High::zero;
    ry.low = kind == ExtensionKind::even ? Low::even : kind == ExtensionKind::odd ? Low::odd : Low::zero;
    ry.high = High::quadratic;
    ry.band = band_nodes(g.dy(), m.theta);

    Field a = f, b(g);
    const std::size_t sy = 1, sx = g.n_y, st = g.n_x * g.n_y;
    parallel_for(g.n_x * g.n_y, [&](std::size_t k) {
        conv_line(a.values().data() + k, b.values().data() + k, nt, st, rt);
    });
    parallel_for(g.n_t * g.n_y, [&](std::size_t k) {
        const std::size_t it = k / g.n_y, iy = k % g.n_y;
        conv_periodic(b.values().data() + it * st + iy, a.values().data() + it * st + iy, nx, sx, rx);
    });
    parallel_for(g.n_t * g.n_x, [&](std::size_t k) {
        conv_line(a.values().data() + k * sx, b.values().data() + k * sx, ny, sy, ry);
    });
    b.require_finite("smooth");
    return b;
}

Field smooth_S(const Field& f, double theta, ShiftSign sign) {
    return smooth(f, Mollifier{theta, sign, true}, ExtensionKind::zero);
}
Field smooth_Su(const Field& u, double theta, ShiftSign sign) {
    return smooth(u, Mollifier{theta, sign, false}, ExtensionKind::even);
}
Field smooth_Sv(const Field& v, double theta, ShiftSign sign) {
    return smooth(v, Mollifier{theta, sign, false}, ExtensionKind::odd);
}

double verify_divergence_preservation(const Field& u, const Field& v, double theta, ShiftSign sign,
                                      double incoming_tol) {
    if (!u.same_shape(v) || u.kind() != FieldKind::interior)
        throw StructuralError("verify_divergence_preservation: u and v must be interior fields of one shape");
    const Field ux = d_x(u), vy = d_y(v, 1);
    const double div_in = (ux + vy).max_abs();
    const double tol = incoming_tol >= 0.0 ? incoming_tol : 0.05 * std::max(ux.max_abs(), vy.max_abs()) + 1e-14;
    if (div_in > tol) {
        std::ostringstream os;
        os << "input pair is not divergence free: max |u_x + v_y| = " << div_in << " (tolerance " << tol << ")";
        throw DomainError(os.str());
    }
    const double v0 = v.trace(0).max_abs();
    if (v0 > 1e-12 * std::max(1.0, v.max_abs())) {
        std::ostringstream os;
        os << "input v does not vanish at the wall: max |v(0)| = " << v0;
        throw DomainError(os.str());
    }
    const Field su = smooth_Su(u, theta, sign), sv = smooth_Sv(v, theta, sign);
    return (d_x(su) + d_y(sv, 1)).max_abs();
}

ExponentFit measure_operator_exponents(const std::vector<Field>& family, ExponentProbe probe, int s, int alpha,
                                       const std::vector<double>& thetas, double ell, ShiftSign sign) {
    if (thetas.size() < 3) throw StructuralError("measure_operator_exponents: needs at least three theta samples");
    if (family.empty()) throw StructuralError("measure_operator_exponents: empty test family");
    ExponentFit out;
    for (double th : thetas) {
        double worst = 0.0;
        for (const Field& f : family) {
            const double base = norm_A(f, alpha, ell);
            if (!(base > 0.0)) continue;
            Field sf = smooth_S(f, th, sign);
            if (probe == ExponentProbe::approximation) sf = f - sf;
            worst = std::max(worst, norm_A(sf, s, ell) / base);
        }
        out.thetas.push_back(th);
        out.ratios.push_back(worst);
    }
    out.fit = fit_loglog(out.thetas, out.ratios);
    return out;
}

double commutator_gap(const Field& f, const Field& g, double theta, int k, double ell) {
    return norm_A(smooth_S(g * f, theta) - g * smooth_S(f, theta), k, ell);
}

}  // namespace prandtl
