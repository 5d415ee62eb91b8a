#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prandtl/fit.hpp"
#include "prandtl/grid_field.hpp"
#include "prandtl/linearized_prandtl.hpp"
#include "prandtl/run_log.hpp"
#include "prandtl/shear_flow.hpp"
#include "prandtl/smoothing_ops.hpp"

namespace prandtl {

struct IterationConfig {
    double theta0 = 10.0;
    int k_tilde = 7;
    int k0 = 2;
    double epsilon = 1e-2;
    double delta = 0.05;  // floor for beta - eta at the wall
    int max_iters = 30;
    double residual_tol = 1e-4;  // relative to the initial residual
    int norm_k = 0;
    double norm_ell = 1.0;
    ShiftSign shift = ShiftSign::past;
    int max_backoffs = 4;
    int correction_sweeps = 1;  // extra Case I solves on the linear defect
    GridSpec grid{21, 48, 201, 0.5, 2.0, 8.0};

    double theta(int n) const;
    double dtheta(int n) const { return theta(n + 1) - theta(n); }
    /// Throws ConfigError unless theta0 >= 3 and the first max_iters+1
    /// schedule values are resolvable on `grid`.
    void validate() const;
};

/// t = 0 slice eps cos(2 pi x / L_x) phi(y), phi = u^s_yy(t_ref, y) exp(-(2y/Y_max)^8)
/// for the canonical shear, scaled to unit maximum. u^s_y - beta u^s stays odd in y,
/// so phi meets every Robin compatibility condition; phi decays like u^s_y, so the
/// guard survives far out; the heat flow up to t_ref tames its high derivatives.
Field initial_perturbation(const GridSpec& g, double sigma, double beta, double eps, double t_ref = 0.5);

/// The t = 0 slice of a field: a grid copy with n_t = 1.
Field sample_initial(const GridSpec& g, const std::function<double(double, double)>& f);

/// Discrete P(u^s + p, v) - (shear residual): p_t + (u^s + p)p_x + v(u^s_y + p_y) - p_yy.
Field residual_operator(const Field& p, const Field& v, const ShearProfile& shear);
/// Linearization around (u^s + pb, vb) applied to (du, dv).
Field linearized_operator(const Field& du, const Field& dv, const Field& pb, const Field& vb,
                          const ShearProfile& shear);

struct ZerothOrder {
    Field p0, v0, f_a;
    std::vector<Field> dt_slices;  // d_t^j of the perturbation at t = 0, j = 0..k0
    std::vector<Field> dt_v_slices;
};

/// Taylor construction of order k0 from the t = 0 slice u_tilde0.
ZerothOrder zeroth_order(const ShearProfile& shear, const Field& u_tilde0, int k0);

struct IterationRecord {
    int n = 0;
    double theta = 0.0, dtheta = 0.0;
    double du_norm = 0.0, e_norm = 0.0, f_norm = 0.0;
    double residual = 0.0;  // ||P(u^{n+1}, v^{n+1})||
    double guard_margin = 0.0, min_uy = 0.0;
    double robin_residual = 0.0;     // max |d_y du - beta du| at the wall
    double audit_increment = 0.0;    // P(n+1) - P(n) - P'(du) - e_n, sup norm
    double audit_residual = 0.0;     // P(n+1) - e_n - (1-S)(sum e + f^a) - sum D, sup norm
    double defect_sum = 0.0;         // || sum_j D_j ||, linear-solve defect
    double telescoping = 0.0;        // sum f^j + S(sum e_j) + S f^a, sup norm
    double reconstruction = 0.0;     // p - (p0 + sum du), sup norm
    nlohmann::json to_json() const;
};

struct IterationState {
    int n = 0;
    double theta_n = 0.0;
    Field p, v;             // u^n - u^s and v^n
    Field p0, v0;           // zeroth order
    Field du_sum;           // sum of increments so far
    Field delta_u, delta_v; // last increments
    Field e_prior;          // sum_{j <= n-2} e_j
    Field e_last;           // e_{n-1}
    Field f_a, f_n, f_sum;
    Field defect_sum;
    Field residual;         // P(u^n, v^n)
    std::vector<IterationRecord> records;
};

/// Sets up the state at n = 0 (zeroth order, residual f^a).
IterationState start_iteration(const IterationConfig& cfg, const ShearProfile& shear, const Field& u_tilde0);
struct MollifiedBackground {
    Field p_theta, v_theta;  // S^u p and S^v v
    BackgroundState bg;
};
/// Applies S^u, S^v at theta and builds the background. Throws
/// MonotonicityError when the guard u_y > 0, beta - eta(0) >= delta fails.
MollifiedBackground mollify_background(const IterationState& st, const ShearProfile& shear, double theta,
                                       ShiftSign sign, double delta);
/// f^n from the three-case recursion.
Field force_update(const IterationState& st, const IterationConfig& cfg);
/// One step: mollify, guard, solve, update errors and residual.
void iterate_once(IterationState& st, const IterationConfig& cfg, const ShearProfile& shear, RunLog* log = nullptr);

struct ConvergenceReport {
    bool converged = false, diverged = false;
    std::string reason;
    double epsilon_used = 0.0;
    int backoffs = 0;
    double initial_residual = 0.0, final_residual = 0.0;
    bool monotone_after_2 = false;
    int iterations = 0;
    std::vector<IterationRecord> records;
    LineFit rate_fit;  // log ||du^n|| vs log(theta_n^{3-k_tilde} dtheta_n), n >= 2
    double robin_relative = 0.0;  // converged iterate
    IterationState final_state;
    nlohmann::json to_json() const;
};

/// Full loop with the epsilon back-off on an initial guard failure.
/// `data` gives the t = 0 perturbation slice for a given epsilon.
ConvergenceReport run_iteration(const IterationConfig& cfg, const ShearProfile& shear,
                                const std::function<Field(double)>& data, RunLog* log = nullptr);
/// Canonical data initial_perturbation(grid, sigma, beta, eps).
ConvergenceReport run_iteration(const IterationConfig& cfg, const ShearProfile& shear, double sigma,
                                RunLog* log = nullptr);

/// Canonical shear on the iteration grid (kernel quadrature).
ShearProfile canonical_shear(const GridSpec& g, double sigma, double beta);

struct StabilityReport {
    double data_gap = 0.0;          // ||u0_1 - u0_2||
    double difference_norm = 0.0;   // ||u^1 - u^2||_A + ||(u^1 - u^2)|_{y=0}||
    double data_functional = 0.0;   // ||w0|| + ||w0|_{y=0}|| / max(sqrt(beta - C_eta), sqrt(delta))
    double fitted_constant = 0.0;
    double linear_mismatch = 0.0;   // || (u^1 - u^2) - u_case_II || / ||u^1 - u^2||
    bool both_converged = false;
    std::string note;
    nlohmann::json to_json() const;
};

/// Two full runs with data eps1, eps2 (canonical shape) and the difference
/// problem on the midpoint background.
StabilityReport stability_experiment(double eps1, double eps2, const ShearProfile& shear, double sigma,
                                     const IterationConfig& cfg, RunLog* log = nullptr);

struct ScheduleSum {
    int k = 0;
    std::vector<double> ratios;  // j = 1..j_max
    double drift = 0.0;          // (max - min) / max over j in [j_max/2, j_max]
    double max_ratio = 0.0;
};
std::vector<ScheduleSum> schedule_sum_check(double theta0, int k_tilde, int j_max, double delta_theta = 0.1);

struct DirichletPoint {
    double beta = 0.0;
    double trace_norm = 0.0;  // ||(u - u^s)|_{y=0}||_{A^0} of the last iterate
    bool converged = false, diverged = false;
    int iterations = 0;
};
struct DirichletScan {
    std::vector<DirichletPoint> points;
    double epsilon = 0.0;  // common data amplitude
    LineFit fit;           // log trace_norm vs log beta over the points that did not diverge
    nlohmann::json to_json() const;
};
/// Full iteration for each beta with the canonical shear and data, all at one
/// epsilon: the smallest that any beta needed after back-off.
DirichletScan dirichlet_limit(const std::vector<double>& betas, double sigma, const IterationConfig& cfg,
                              RunLog* log = nullptr);

}  // namespace prandtl
