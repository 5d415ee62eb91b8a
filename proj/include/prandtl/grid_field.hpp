#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "prandtl/run_log.hpp"

namespace prandtl {

/// Uniform grid on [0,T] x [0,L_x) x [0,Y_max]; x is periodic.
struct GridSpec {
    std::size_t n_t = 0, n_x = 0, n_y = 0;
    double t_max = 0.0;
    double x_len = 0.0;
    double y_max = 0.0;

    double dt() const { return t_max / static_cast<double>(n_t - 1); }
    double dx() const { return x_len / static_cast<double>(n_x); }
    double dy() const { return y_max / static_cast<double>(n_y - 1); }
    double t(std::size_t i) const { return dt() * static_cast<double>(i); }
    double x(std::size_t i) const { return dx() * static_cast<double>(i); }
    double y(std::size_t i) const { return dy() * static_cast<double>(i); }
    double max_spacing() const;

    /// Throws StructuralError unless every count is >= 4 and every length > 0.
    void validate() const;
    bool operator==(const GridSpec& o) const = default;
};

enum class FieldKind { interior, boundary_trace, y_profile };

/// Samples on the grid, stored t-major then x then y (y contiguous).
/// A boundary trace keeps n_y = 1, a y-profile keeps n_x = 1.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& g, FieldKind kind = FieldKind::interior);
    Field(const GridSpec& g, FieldKind kind, std::vector<double> values);

    static Field sample(const GridSpec& g, const std::function<double(double, double, double)>& f);
    static Field sample_trace(const GridSpec& g, const std::function<double(double, double)>& f);

    const GridSpec& grid() const { return grid_; }
    FieldKind kind() const { return kind_; }
    std::size_t nt() const { return nt_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return v_.size(); }
    std::size_t index(std::size_t it, std::size_t ix, std::size_t iy) const {
        return (it * nx_ + ix) * ny_ + iy;
    }

    double operator()(std::size_t it, std::size_t ix, std::size_t iy) const {
        return v_[index(it, ix, iy)];
    }
    double& operator()(std::size_t it, std::size_t ix, std::size_t iy) {
        return v_[index(it, ix, iy)];
    }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    double* column(std::size_t it, std::size_t ix) { return v_.data() + index(it, ix, 0); }
    const double* column(std::size_t it, std::size_t ix) const { return v_.data() + index(it, ix, 0); }

    bool same_shape(const Field& o) const {
        return kind_ == o.kind_ && nt_ == o.nt_ && nx_ == o.nx_ && ny_ == o.ny_;
    }
    /// Restriction to row iy as a boundary trace (iy = 0 gives the wall trace).
    Field trace(std::size_t iy = 0) const;
    /// Copies a y-profile along x into an interior field.
    Field broadcast_x() const;
    /// Copies a boundary trace along y into an interior field with n_y rows.
    Field broadcast_y() const;

    double max_abs() const;
    bool all_finite() const;
    /// Throws NumericalError naming `what` if any sample is NaN/Inf.
    void require_finite(const char* what) const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(const Field& o);
    Field& operator*=(double c);

private:
    GridSpec grid_{};
    FieldKind kind_ = FieldKind::interior;
    std::size_t nt_ = 0, nx_ = 0, ny_ = 0;
    std::vector<double> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator*(Field a, double c);
Field operator*(double c, Field a);
Field operator/(const Field& a, const Field& b);
Field operator-(Field a);

/// Periodic central difference in x.
Field d_x(const Field& f);
/// Central difference in y with one-sided second-order stencils at both ends.
/// order = 2 gives the three-point second difference (four-point at the ends).
Field d_y(const Field& f, int order = 1);
/// Central difference in t, one-sided second order at t = 0 and t = T.
Field d_t(const Field& f);

/// Trapezoid value of int_{y_j}^{Y_max} w for every node: the tail beyond
/// Y_max counts as zero. Warns into `log` if |w(Y_max)| exceeds tail_tol.
Field tail_integral(const Field& w, RunLog* log = nullptr, double tail_tol = 1e-8);
/// Same, restricted to the row y_index; returns a boundary-trace shaped field.
Field tail_integral(const Field& w, std::size_t y_index, RunLog* log = nullptr,
                    double tail_tol = 1e-8);
/// Trapezoid value of int_0^{y_j} f for every node.
Field cumulative_integral(const Field& f);

/// Quadrature weights: trapezoid in t and y, rectangle (periodic) in x.
std::vector<double> trapezoid_weights(std::size_t n, double h);

}  // namespace prandtl
