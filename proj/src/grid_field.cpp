#include "prandtl/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/parallel.hpp"

namespace prandtl {

unsigned thread_count() {
    static const unsigned n = [] {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("PRANDTL_THREADS")) {
            long cap = std::strtol(env, nullptr, 10);
            if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
        }
        return hw;
    }();
    return n;
}

double GridSpec::max_spacing() const { return std::max({dt(), dx(), dy()}); }

void GridSpec::validate() const {
    if (n_t < 4 || n_x < 4 || n_y < 4) {
        std::ostringstream os;
        os << "grid counts must be >= 4 (n_t=" << n_t << ", n_x=" << n_x << ", n_y=" << n_y << ")";
        throw StructuralError(os.str());
    }
    if (!(t_max > 0.0) || !(x_len > 0.0) || !(y_max > 0.0))
        throw StructuralError("grid lengths t_max, x_len, y_max must be positive");
}

Field::Field(const GridSpec& g, FieldKind kind) : grid_(g), kind_(kind) {
    nt_ = g.n_t;
    nx_ = kind == FieldKind::y_profile ? 1 : g.n_x;
    ny_ = kind == FieldKind::boundary_trace ? 1 : g.n_y;
    v_.assign(nt_ * nx_ * ny_, 0.0);
}

Field::Field(const GridSpec& g, FieldKind kind, std::vector<double> values) : Field(g, kind) {
    if (values.size() != v_.size()) throw StructuralError("Field: value count does not match grid");
    v_ = std::move(values);
}

Field Field::sample(const GridSpec& g, const std::function<double(double, double, double)>& f) {
    Field out(g);
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix)
            for (std::size_t iy = 0; iy < g.n_y; ++iy) out(it, ix, iy) = f(g.t(it), g.x(ix), g.y(iy));
    return out;
}

Field Field::sample_trace(const GridSpec& g, const std::function<double(double, double)>& f) {
    Field out(g, FieldKind::boundary_trace);
    for (std::size_t it = 0; it < g.n_t; ++it)
        for (std::size_t ix = 0; ix < g.n_x; ++ix) out(it, ix, 0) = f(g.t(it), g.x(ix));
    return out;
}

Field Field::trace(std::size_t iy) const {
    if (kind_ != FieldKind::interior) throw StructuralError("trace: needs an interior field");
    Field out(grid_, FieldKind::boundary_trace);
    for (std::size_t it = 0; it < nt_; ++it)
        for (std::size_t ix = 0; ix < nx_; ++ix) out(it, ix, 0) = (*this)(it, ix, iy);
    return out;
}

Field Field::broadcast_x() const {
    if (kind_ != FieldKind::y_profile) throw StructuralError("broadcast_x: needs a y-profile");
    Field out(grid_);
    for (std::size_t it = 0; it < nt_; ++it)
        for (std::size_t ix = 0; ix < out.nx(); ++ix)
            std::copy_n(column(it, 0), ny_, out.column(it, ix));
    return out;
}

Field Field::broadcast_y() const {
    if (kind_ != FieldKind::boundary_trace) throw StructuralError("broadcast_y: needs a trace");
    Field out(grid_);
    for (std::size_t it = 0; it < nt_; ++it)
        for (std::size_t ix = 0; ix < nx_; ++ix) std::fill_n(out.column(it, ix), out.ny(), (*this)(it, ix, 0));
    return out;
}

double Field::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

bool Field::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

void Field::require_finite(const char* what) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (!std::isfinite(v_[i])) {
            std::size_t iy = i % ny_, ix = (i / ny_) % nx_, it = i / (ny_ * nx_);
            std::ostringstream os;
            os << what << ": non-finite value at (it=" << it << ", ix=" << ix << ", iy=" << iy << ")";
            throw NumericalError(os.str());
        }
    }
}

namespace {
void require_same(const Field& a, const Field& b, const char* op) {
    if (!a.same_shape(b)) throw StructuralError(std::string("shape mismatch in ") + op);
}
}  // namespace

Field& Field::operator+=(const Field& o) {
    require_same(*this, o, "+");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}
Field& Field::operator-=(const Field& o) {
    require_same(*this, o, "-");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}
Field& Field::operator*=(const Field& o) {
    require_same(*this, o, "*");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] *= o.v_[i];
    return *this;
}
Field& Field::operator*=(double c) {
    for (double& x : v_) x *= c;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(Field a, double c) { return a *= c; }
Field operator*(double c, Field a) { return a *= c; }
Field operator-(Field a) { return a *= -1.0; }
Field operator/(const Field& a, const Field& b) {
    require_same(a, b, "/");
    Field out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = a.values()[i] / b.values()[i];
    return out;
}

namespace {

// First derivative along a strided line of n samples.
void diff1(const double* in, double* out, std::size_t n, std::size_t s, double h) {
    const double c = 0.5 / h;
    out[0] = c * (-3.0 * in[0] + 4.0 * in[s] - in[2 * s]);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i * s] = c * (in[(i + 1) * s] - in[(i - 1) * s]);
    const std::size_t e = (n - 1) * s;
    out[e] = c * (3.0 * in[e] - 4.0 * in[e - s] + in[e - 2 * s]);
}

void diff2(const double* in, double* out, std::size_t n, std::size_t s, double h) {
    const double c = 1.0 / (h * h);
    out[0] = c * (2.0 * in[0] - 5.0 * in[s] + 4.0 * in[2 * s] - in[3 * s]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i * s] = c * (in[(i + 1) * s] - 2.0 * in[i * s] + in[(i - 1) * s]);
    const std::size_t e = (n - 1) * s;
    out[e] = c * (2.0 * in[e] - 5.0 * in[e - s] + 4.0 * in[e - 2 * s] - in[e - 3 * s]);
}

}  // namespace

Field d_x(const Field& f) {
    if (f.kind() == FieldKind::y_profile) throw StructuralError("d_x: y-profile has no x extent");
    if (f.nx() != f.grid().n_x) throw StructuralError("d_x: field does not match its grid");
    Field out(f.grid(), f.kind());
    const std::size_t nx = f.nx(), ny = f.ny();
    const double c = 0.5 / f.grid().dx();
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double* p = f.column(it, (ix + 1) % nx);
            const double* m = f.column(it, (ix + nx - 1) % nx);
            double* o = out.column(it, ix);
            for (std::size_t iy = 0; iy < ny; ++iy) o[iy] = c * (p[iy] - m[iy]);
        }
    return out;
}

Field d_y(const Field& f, int order) {
    if (f.kind() == FieldKind::boundary_trace) throw StructuralError("d_y: trace has no y extent");
    if (f.ny() < 4) throw StructuralError("d_y: needs n_y >= 4");
    if (order != 1 && order != 2) throw StructuralError("d_y: order must be 1 or 2");
    Field out(f.grid(), f.kind());
    const double h = f.grid().dy();
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            if (order == 1)
                diff1(f.column(it, ix), out.column(it, ix), f.ny(), 1, h);
            else
                diff2(f.column(it, ix), out.column(it, ix), f.ny(), 1, h);
        }
    return out;
}

Field d_t(const Field& f) {
    if (f.nt() < 3) throw StructuralError("d_t: needs n_t >= 3");
    Field out(f.grid(), f.kind());
    const std::size_t stride = f.nx() * f.ny();
    const double h = f.grid().dt();
    for (std::size_t k = 0; k < stride; ++k) diff1(f.values().data() + k, out.values().data() + k, f.nt(), stride, h);
    return out;
}

Field tail_integral(const Field& w, RunLog* log, double tail_tol) {
    if (w.kind() == FieldKind::boundary_trace) throw StructuralError("tail_integral: trace has no y extent");
    Field out(w.grid(), w.kind());
    const std::size_t ny = w.ny();
    const double h = w.grid().dy();
    double worst = 0.0;
    for (std::size_t it = 0; it < w.nt(); ++it)
        for (std::size_t ix = 0; ix < w.nx(); ++ix) {
            const double* c = w.column(it, ix);
            double* o = out.column(it, ix);
            worst = std::max(worst, std::abs(c[ny - 1]));
            o[ny - 1] = 0.0;
            for (std::size_t j = ny - 1; j-- > 0;) o[j] = o[j + 1] + 0.5 * h * (c[j] + c[j + 1]);
        }
    if (log && worst > tail_tol) {
        std::ostringstream os;
        os << "tail_integral: |w(Y_max)| = " << worst << " exceeds tail tolerance " << tail_tol;
        log->warn(os.str());
    }
    return out;
}

Field tail_integral(const Field& w, std::size_t y_index, RunLog* log, double tail_tol) {
    if (y_index >= w.ny()) throw StructuralError("tail_integral: y_index out of range");
    Field full = tail_integral(w, log, tail_tol);
    Field out(w.grid(), FieldKind::boundary_trace);
    for (std::size_t it = 0; it < w.nt(); ++it)
        for (std::size_t ix = 0; ix < w.nx(); ++ix) out(it, ix, 0) = full(it, ix, y_index);
    return out;
}

Field cumulative_integral(const Field& f) {
    if (f.kind() == FieldKind::boundary_trace) throw StructuralError("cumulative_integral: trace has no y extent");
    Field out(f.grid(), f.kind());
    const double h = f.grid().dy();
    for (std::size_t it = 0; it < f.nt(); ++it)
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const double* c = f.column(it, ix);
            double* o = out.column(it, ix);
            o[0] = 0.0;
            for (std::size_t j = 1; j < f.ny(); ++j) o[j] = o[j - 1] + 0.5 * h * (c[j] + c[j - 1]);
        }
    return out;
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    if (n > 0) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    return w;
}

}  // namespace prandtl
