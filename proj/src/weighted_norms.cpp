#include "prandtl/weighted_norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/linearized_prandtl.hpp"
#include "prandtl/shear_flow.hpp"

namespace prandtl {

std::vector<IndexPair> index_set(int k) {
    std::vector<IndexPair> out;
    if (k < 0) return out;
    for (int k1 = 0; k1 <= k; ++k1)
        for (int k2 = 0; k1 + (k2 + 1) / 2 <= k; ++k2) out.emplace_back(k1, k2);
    return out;
}

Field mixed_derivative(const Field& f, int a_t, int b_x, int q_y) {
    if (a_t < 0 || b_x < 0 || q_y < 0) throw StructuralError("mixed_derivative: negative order");
    if (q_y > 0 && f.kind() == FieldKind::boundary_trace)
        throw StructuralError("mixed_derivative: a wall trace has no y derivatives");
    if (b_x > 0 && f.kind() == FieldKind::y_profile) return Field(f.grid(), f.kind());
    if (q_y > 0 && f.ny() < static_cast<std::size_t>(q_y) + 4) {
        std::ostringstream os;
        os << "insufficient y resolution for " << q_y << " derivatives (n_y=" << f.ny() << ")";
        throw StructuralError(os.str());
    }
    Field g = f;
    for (int i = 0; i < q_y / 2; ++i) g = d_y(g, 2);
    if (q_y % 2) g = d_y(g, 1);
    for (int i = 0; i < b_x; ++i) g = d_x(g);
    for (int i = 0; i < a_t; ++i) g = d_t(g);
    return g;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Quadrature weights per axis; an axis of extent one is a point evaluation.
struct Weights {
    std::vector<double> t, x, y, bracket;  // bracket = <y>^ell per y node
};

Weights weights_for(const Field& f, double ell) {
    const GridSpec& g = f.grid();
    Weights w;
    w.t = trapezoid_weights(f.nt(), g.dt());
    w.x = f.nx() > 1 ? std::vector<double>(f.nx(), g.dx()) : std::vector<double>(1, 1.0);
    w.y = f.ny() > 1 ? trapezoid_weights(f.ny(), g.dy()) : std::vector<double>(1, 1.0);
    w.bracket.resize(f.ny());
    for (std::size_t j = 0; j < f.ny(); ++j) {
        const double y = f.ny() > 1 ? g.y(j) : 0.0;
        w.bracket[j] = std::pow(1.0 + y * y, 0.5 * ell);
    }
    return w;
}

// Every (a, b) with a + b = order; x derivatives are skipped for y-profiles.
std::vector<IndexPair> tangential(int order, const Field& f) {
    std::vector<IndexPair> out;
    for (int b = 0; b <= order; ++b) {
        if (b > 0 && f.kind() == FieldKind::y_profile) break;
        out.emplace_back(order - b, b);
    }
    return out;
}

void check_resolution(const Field& f, int k1, int k2) {
    if (k2 > 0 && f.ny() < static_cast<std::size_t>(k2) + 4) {
        std::ostringstream os;
        os << "insufficient resolution for (k1,k2)=(" << k1 << "," << k2 << "): n_y=" << f.ny();
        throw StructuralError(os.str());
    }
    if (k1 > 0 && f.nt() < 4) {
        std::ostringstream os;
        os << "insufficient resolution for (k1,k2)=(" << k1 << "," << k2 << "): n_t=" << f.nt();
        throw StructuralError(os.str());
    }
}

double weighted_l2_sq(const Field& d, const Weights& w, double lambda = 0.0) {
    double s = 0.0;
    const GridSpec& g = d.grid();
    for (std::size_t it = 0; it < d.nt(); ++it) {
        const double decay = lambda != 0.0 ? std::exp(-2.0 * lambda * g.t(it)) : 1.0;
        for (std::size_t ix = 0; ix < d.nx(); ++ix) {
            const double* c = d.column(it, ix);
            double col = 0.0;
            for (std::size_t iy = 0; iy < d.ny(); ++iy) {
                const double v = w.bracket[iy] * c[iy];
                col += w.y[iy] * v * v;
            }
            s += decay * w.t[it] * w.x[ix] * col;
        }
    }
    return s;
}

// L2_y of <y>^ell * max_{t,x} |d|
double l2y_linf_tx(const Field& d, const Weights& w) {
    double s = 0.0;
    for (std::size_t iy = 0; iy < d.ny(); ++iy) {
        double m = 0.0;
        for (std::size_t it = 0; it < d.nt(); ++it)
            for (std::size_t ix = 0; ix < d.nx(); ++ix) m = std::max(m, std::abs(d(it, ix, iy)));
        const double v = w.bracket[iy] * m;
        s += w.y[iy] * v * v;
    }
    return std::sqrt(s);
}

// max_y <y>^ell * L2_{t,x} of d
double linfy_l2_tx(const Field& d, const Weights& w) {
    double best = 0.0;
    for (std::size_t iy = 0; iy < d.ny(); ++iy) {
        double s = 0.0;
        for (std::size_t it = 0; it < d.nt(); ++it)
            for (std::size_t ix = 0; ix < d.nx(); ++ix) {
                const double v = d(it, ix, iy);
                s += w.t[it] * w.x[ix] * v * v;
            }
        best = std::max(best, w.bracket[iy] * std::sqrt(s));
    }
    return best;
}

// max_t e^{-2 lambda t} || <y>^ell d(t) ||^2_{L2_{x,y}}
double linft_l2_sq(const Field& d, const Weights& w, double lambda) {
    double best = 0.0;
    const GridSpec& g = d.grid();
    for (std::size_t it = 0; it < d.nt(); ++it) {
        double s = 0.0;
        for (std::size_t ix = 0; ix < d.nx(); ++ix)
            for (std::size_t iy = 0; iy < d.ny(); ++iy) {
                const double v = w.bracket[iy] * d(it, ix, iy);
                s += w.x[ix] * w.y[iy] * v * v;
            }
        best = std::max(best, std::exp(-2.0 * lambda * g.t(it)) * s);
    }
    return best;
}

std::vector<IndexPair> rectangle(int k1, int k2) {
    std::vector<IndexPair> out;
    for (int m = 0; m <= k1; ++m)
        for (int q = 0; q <= k2; ++q) out.emplace_back(m, q);
    return out;
}

}  // namespace

double norm_A(const Field& f, int k, double ell, bool homogeneous) {
    if (f.kind() == FieldKind::boundary_trace) throw StructuralError("norm_A: needs an interior field");
    const Weights w = weights_for(f, ell);
    double s = 0.0;
    for (auto [k1, k2] : index_set(k)) {
        if (homogeneous && k1 == 0 && k2 == 0) continue;
        check_resolution(f, k1, k2);
        for (auto [a, b] : tangential(k1, f)) s += weighted_l2_sq(mixed_derivative(f, a, b, k2), w);
    }
    return std::sqrt(s);
}

double norm_boundary_A(const Field& trace, int k, bool homogeneous) {
    if (trace.kind() != FieldKind::boundary_trace) throw StructuralError("norm_boundary_A: needs a wall trace");
    const Weights w = weights_for(trace, 0.0);
    double s = 0.0;
    for (int m = homogeneous ? 1 : 0; m <= k; ++m) {
        check_resolution(trace, m, 0);
        for (auto [a, b] : tangential(m, trace)) s += weighted_l2_sq(mixed_derivative(trace, a, b, 0), w);
    }
    return std::sqrt(s);
}

double norm_mixed(const Field& f, MixedFamily family, const MixedParams& p) {
    const Weights w = weights_for(f, p.ell);
    std::vector<IndexPair> pairs;
    if (family == MixedFamily::B || family == MixedFamily::B_sup) {
        auto r = p.rect.value_or(IndexPair{p.k, 2 * p.k});
        pairs = rectangle(r.first, r.second);
    } else {
        pairs = p.rect ? rectangle(p.rect->first, p.rect->second) : index_set(p.k);
    }
    if (f.kind() == FieldKind::boundary_trace)
        pairs.erase(std::remove_if(pairs.begin(), pairs.end(), [](const IndexPair& q) { return q.second > 0; }),
                    pairs.end());
    double sum = 0.0, sq = 0.0;
    for (auto [k1, k2] : pairs) {
        if (p.homogeneous && k1 == 0 && k2 == 0) continue;
        check_resolution(f, k1, k2);
        for (auto [a, b] : tangential(k1, f)) {
            const Field d = mixed_derivative(f, a, b, k2);
            switch (family) {
                case MixedFamily::C: sum += l2y_linf_tx(d, w); break;
                case MixedFamily::D: sum += linfy_l2_tx(d, w); break;
                case MixedFamily::B: sq += weighted_l2_sq(d, w, p.lambda); break;
                case MixedFamily::B_sup: sq += linft_l2_sq(d, w, p.lambda); break;
            }
        }
    }
    return (family == MixedFamily::C || family == MixedFamily::D) ? sum : std::sqrt(sq);
}

double trace_sup_sum(const Field& trace, int k) {
    double s = 0.0;
    for (int m = 0; m <= k; ++m)
        for (auto [a, b] : tangential(m, trace)) s += mixed_derivative(trace, a, b, 0).max_abs();
    return s;
}

std::string NormReport::key_A(int k, double ell) { return "A:k=" + std::to_string(k) + ",l=" + fmt(ell); }
std::string NormReport::key_Ab(int k) { return "Ab:k=" + std::to_string(k); }
std::string NormReport::key_B(double lambda, double ell, int k1, int k2) {
    return "B:lam=" + fmt(lambda) + ",l=" + fmt(ell) + ",k1=" + std::to_string(k1) + ",k2=" + std::to_string(k2);
}
std::string NormReport::key_C(int k, double ell) { return "C:k=" + std::to_string(k) + ",l=" + fmt(ell); }
std::string NormReport::key_D(int k, double ell) { return "D:k=" + std::to_string(k) + ",l=" + fmt(ell); }

nlohmann::json NormReport::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, v] : values) j[key] = {{"value", v}, {"homogeneous", homogeneous.at(key)}};
    return j;
}

NormReport evaluate_norms(const Field& f, int k_max, double ell) {
    NormReport r;
    for (int k = 0; k <= k_max; ++k) {
        if (f.kind() == FieldKind::boundary_trace) {
            r.put(NormReport::key_Ab(k), norm_boundary_A(f, k));
            continue;
        }
        r.put(NormReport::key_A(k, ell), norm_A(f, k, ell));
        if (f.kind() == FieldKind::interior) r.put(NormReport::key_Ab(k), norm_boundary_A(f.trace(0), k));
        r.put(NormReport::key_C(k, ell), norm_mixed(f, MixedFamily::C, {k, ell, 0.0, std::nullopt, false}));
        r.put(NormReport::key_D(k, ell), norm_mixed(f, MixedFamily::D, {k, ell, 0.0, std::nullopt, false}));
        r.put(NormReport::key_B(0.0, ell, k, 2 * k),
              norm_mixed(f, MixedFamily::B, {k, ell, 0.0, IndexPair{k, 2 * k}, false}));
    }
    return r;
}

nlohmann::json LambdaReport::to_json() const {
    nlohmann::json j;
    for (const auto& [kk, v] : lambda_interior)
        j["interior"]["k1=" + std::to_string(kk.first) + ",k2=" + std::to_string(kk.second)] = v;
    for (const auto& [k, v] : lambda_boundary) j["boundary"]["k1=" + std::to_string(k)] = v;
    for (const auto& [k, v] : lambda_total) j["total"]["k=" + std::to_string(k)] = v;
    j["summands"] = summands;
    return j;
}

LambdaReport lambda_diagnostics(const BackgroundState& bg, const ShearProfile& shear, int k, double ell) {
    if (!(bg.grid == shear.grid)) throw StructuralError("lambda_diagnostics: background and shear grids differ");
    LambdaReport r;
    const Field ux = d_x(bg.u_tilde);
    const Field gap = bg.eta - bg.eta_bar;
    auto B = [](const Field& f, int k1, int k2, double l) {
        return norm_mixed(f, MixedFamily::B, {0, l, 0.0, IndexPair{k1, k2}, false});
    };
    auto rect = [](MixedFamily fam, const Field& f, int k1, int k2) {
        return norm_mixed(f, fam, {0, 0.0, 0.0, IndexPair{k1, k2}, false});
    };
    for (auto [k1, k2] : index_set(k)) {
        const std::string tag = std::to_string(k1) + "," + std::to_string(k2);
        std::map<std::string, double> s;
        s["perturbation"] = B(bg.p, k1, k2, 0.0);
        s["u_x"] = B(ux, k1, k2, 0.0);
        if (k1 > 0 || k2 > 0) s["shear"] = rect(MixedFamily::C, shear.u_s, k1, k2);
        s["v"] = rect(MixedFamily::D, bg.v_tilde, k1, k2);
        s["eta_bar"] = rect(MixedFamily::C, bg.eta_bar, k1, k2);
        s["eta_gap"] = B(gap, k1, k2, 0.0);
        s["zeta"] = B(bg.zeta, k1, k2, ell);
        double total = 0.0;
        for (const auto& [name, v] : s) {
            r.summands["interior(" + tag + "):" + name] = v;
            total += v;
        }
        r.lambda_interior[{k1, k2}] = total;
    }
    const Field p0 = bg.p.trace(0), ux0 = ux.trace(0), eb0 = bg.eta_bar.trace(0), gap0 = gap.trace(0);
    for (int k1 = 0; k1 <= k; ++k1) {
        std::map<std::string, double> s;
        s["perturbation"] = norm_boundary_A(p0, k1);
        s["u_x"] = norm_boundary_A(ux0, k1);
        double us = 0.0;
        for (int m = 0; m <= k1; ++m) {
            const Field d = mixed_derivative(shear.u_s, m, 0, 0);
            double mx = 0.0;
            for (std::size_t it = 0; it < d.nt(); ++it) mx = std::max(mx, std::abs(d(it, 0, 0)));
            us += mx;
        }
        s["shear"] = us;
        s["zeta1"] = trace_sup_sum(bg.zeta1_tilde, k1);
        s["zeta2"] = norm_boundary_A(bg.zeta2_tilde, k1);
        s["eta_bar"] = trace_sup_sum(eb0, k1);
        s["eta_gap"] = norm_boundary_A(gap0, k1);
        double total = 0.0;
        for (const auto& [name, v] : s) {
            r.summands["boundary(" + std::to_string(k1) + "):" + name] = v;
            total += v;
        }
        r.lambda_boundary[k1] = total;
    }
    for (int kk = 0; kk <= k; ++kk) {
        double t = 0.0;
        for (auto pr : index_set(kk)) t += r.lambda_interior.at(pr);
        for (int k1 = 0; k1 <= kk; ++k1) t += r.lambda_boundary.at(k1);
        r.lambda_total[kk] = t;
    }
    return r;
}

}  // namespace prandtl
