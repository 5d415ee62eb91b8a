#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "prandtl/grid_field.hpp"
#include "prandtl/run_log.hpp"

namespace prandtl {

using Profile = std::vector<double>;

/// Time-resolved shear flow u^s(t,y). Every member is a y-profile Field.
/// The deficit 1 - u^s is kept alongside u^s so that u_y stays accurate far
/// from the wall where u^s rounds to 1.
struct ShearProfile {
    GridSpec grid;
    double beta = 1.0;
    Field u_s, deficit, w1;
    Field uy, uyy, uyyy, ut, uyt, uyyt;
    Field alpha, alpha1, alpha2;
    double delta_s = 0.0;  // min over nodes of beta - alpha
};

/// How wall derivatives are closed when building a profile from samples.
enum class WallClosure {
    robin_ghost,  // ghost node from u_y = beta u (profiles that satisfy the Robin condition)
    one_sided     // plain one-sided stencils (arbitrary samples)
};

/// Builds every derived quantity from the deficit 1 - u^s (a y-profile Field).
ShearProfile make_shear_profile(const Field& deficit, double beta, WallClosure closure,
                                const Field* w1_exact = nullptr);
/// Same from u^s samples.
ShearProfile shear_from_samples(const Field& u_s, double beta, WallClosure closure = WallClosure::one_sided);

/// Initial datum w1_0 = -beta tanh(y/sigma) sampled on the grid.
Profile canonical_initial_w1(double sigma, double beta, const GridSpec& g);
/// w1_0 + beta for the canonical profile, in closed form without cancellation.
std::function<double(double)> canonical_w1_deficit(double sigma, double beta);

/// Heat-kernel solution of w_t = w_yy, w(0) = 0, from samples of w1_0; the
/// far-field value is taken from the last sample and continued beyond Y_max.
Profile heat_kernel_w1(const Profile& w1_0, double t, const GridSpec& g);
/// Same for a closed-form datum given through q0 = w1_0 + beta; returns q = w1 + beta.
Profile heat_kernel_w1_deficit(const std::function<double(double)>& q0, double beta, double t,
                               const GridSpec& g);

/// u^s = e^{beta y} int_inf^y e^{-beta s} w1 ds. Beyond Y_max, w1 + beta continues
/// with its last local exponential decay rate.
Profile recover_us(const Profile& w1, double beta, const GridSpec& g);
/// 1 - u^s from q = w1 + beta.
Profile recover_deficit(const Profile& q, double beta, const GridSpec& g);

/// Crank-Nicolson for u_t = u_yy with the Robin ghost node at y = 0 and u = 1 at Y_max.
ShearProfile solve_heat_robin_fd(const Profile& u0_s, double beta, const GridSpec& g);
ShearProfile solve_heat_robin_fd_deficit(const Profile& d0, double beta, const GridSpec& g);

/// Kernel-quadrature shear (exact in time) from q0 = w1_0 + beta.
ShearProfile kernel_shear(const std::function<double(double)>& q0, double beta, const GridSpec& g);

/// alpha_t = alpha_yy + (alpha^2)_y with alpha_y + alpha^2 = beta alpha at y = 0
/// (alpha^2 lagged) and alpha = 0 at Y_max. Returns a y-profile Field over [0,T].
Field solve_alpha_system(const Profile& alpha0, double beta, const GridSpec& g);

struct MarginReport {
    double min_u = 0.0, min_uy = 0.0, min_beta_minus_alpha = 0.0;
    double max_uyy = 0.0;         // concavity monitor
    double robin_residual = 0.0;  // max over t of |u_y - beta u| at y = 0, fourth-order one-sided u_y
    bool all_positive() const { return min_u > 0.0 && min_uy > 0.0 && min_beta_minus_alpha > 0.0; }
};

MarginReport check_monotonicity(const ShearProfile& p);

/// |d_y^{2j} w1_0(0)| for j = 0..orders-1 by one-sided stencils.
std::vector<double> compatibility_residuals(const Profile& w1_0, const GridSpec& g, int orders);

}  // namespace prandtl
