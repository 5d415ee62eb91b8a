#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace prandtl {

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double residual = 0.0;  // rms of the fit residuals
};

// Least squares y = slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        r += e * e;
    }
    f.residual = std::sqrt(r / n);
    return f;
}

// Fit in log-log coordinates; non-positive samples are dropped.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return fit_line(lx, ly);
}

}  // namespace prandtl
