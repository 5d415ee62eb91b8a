#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace prandtl::detail {

// Thomas algorithm: a = sub, b = diag, c = super; rhs overwritten with the solution.
inline void solve_tridiag(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<double>& c, std::vector<double>& rhs) {
    const std::size_t n = b.size();
    std::vector<double> cp(n), bp(n);
    bp[0] = b[0];
    cp[0] = n > 1 ? c[0] / bp[0] : 0.0;
    rhs[0] /= bp[0];
    for (std::size_t i = 1; i < n; ++i) {
        bp[i] = b[i] - a[i] * cp[i - 1];
        cp[i] = i + 1 < n ? c[i] / bp[i] : 0.0;
        rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / bp[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
}

// Periodic tridiagonal system (a[0] couples to x[n-1], c[n-1] to x[0]),
// Sherman-Morrison on top of the Thomas solve.
inline void solve_cyclic(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& c, std::vector<double>& rhs) {
    const std::size_t n = b.size();
    const double gamma = -b[0];
    std::vector<double> bb(b), u(n, 0.0);
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - c[n - 1] * a[0] / gamma;
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    solve_tridiag(a, bb, c, rhs);
    solve_tridiag(a, bb, c, u);
    const double fact = (rhs[0] + a[0] * rhs[n - 1] / gamma) / (1.0 + u[0] + a[0] * u[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * u[i];
}

// Banded LU with partial pivoting (LAPACK gbsv layout, kl sub- and ku super-diagonals).
class BandSolver {
public:
    BandSolver(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(ld_ * n, 0.0), piv_(n) {}

    void clear() { std::fill(ab_.begin(), ab_.end(), 0.0); }
    // A(i, j) with |i - j| inside the band.
    double& at(std::size_t i, std::size_t j) { return ab_[j * ld_ + kl_ + ku_ + i - j]; }

    // Factor and solve in place; returns false on a zero pivot.
    bool solve(std::vector<double>& rhs) {
        const std::size_t kv = kl_ + ku_;
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t km = std::min(kl_, n_ - 1 - j);
            std::size_t p = 0;
            double best = std::abs(ab_[j * ld_ + kv]);
            for (std::size_t r = 1; r <= km; ++r) {
                double v = std::abs(ab_[j * ld_ + kv + r]);
                if (v > best) { best = v; p = r; }
            }
            if (best == 0.0) return false;
            piv_[j] = j + p;
            const std::size_t ju = std::min(n_ - 1, j + kv);
            if (p != 0) {
                for (std::size_t c = j; c <= ju; ++c) std::swap(ref(j, c), ref(j + p, c));
                std::swap(rhs[j], rhs[j + p]);
            }
            const double d = ab_[j * ld_ + kv];
            for (std::size_t r = 1; r <= km; ++r) {
                const double l = ab_[j * ld_ + kv + r] / d;
                ab_[j * ld_ + kv + r] = l;
                if (l == 0.0) continue;
                for (std::size_t c = j + 1; c <= ju; ++c) ref(j + r, c) -= l * ref(j, c);
                rhs[j + r] -= l * rhs[j];
            }
        }
        for (std::size_t j = n_; j-- > 0;) {
            double s = rhs[j];
            const std::size_t ju = std::min(n_ - 1, j + kv);
            for (std::size_t c = j + 1; c <= ju; ++c) s -= ref(j, c) * rhs[c];
            rhs[j] = s / ab_[j * ld_ + kv];
        }
        return true;
    }

private:
    double& ref(std::size_t i, std::size_t j) { return ab_[j * ld_ + kl_ + ku_ + i - j]; }

    std::size_t n_, kl_, ku_, ld_;
    std::vector<double> ab_;
    std::vector<std::size_t> piv_;
};

}  // namespace prandtl::detail
