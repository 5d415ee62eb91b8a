#pragma once

#include <vector>

#include <json.hpp>

#include "prandtl/grid_field.hpp"
#include "prandtl/run_log.hpp"
#include "prandtl/shear_flow.hpp"

namespace prandtl {

/// Frozen coefficients of one linearized solve around (u_tilde, v_tilde).
/// p = u_tilde - u^s is kept separately so that nothing is lost to the
/// cancellation in u_tilde far from the wall.
struct BackgroundState {
    GridSpec grid;
    Field p, u_tilde, v_tilde;
    Field u_y, u_yy;          // derivatives of u_tilde
    Field eta, eta_bar, zeta;  // interior
    Field zeta1_tilde, zeta2_tilde;  // wall traces
    double beta = 1.0;
    double delta = 0.0;  // achieved min of beta - eta at y = 0
    double c_eta = 0.0;  // achieved max |eta|
};

/// From a perturbation p of the shear and the matching v. Throws
/// MonotonicityError if u_y <= 0 somewhere or beta - eta(y=0) < delta_floor.
BackgroundState build_background_from_perturbation(const Field& p, const Field& v_tilde, const ShearProfile& shear,
                                                   double delta_floor = 0.0);
BackgroundState build_background(const Field& u_tilde, const Field& v_tilde, const ShearProfile& shear,
                                 double delta_floor = 0.0);

struct EnergyRecord {
    double t = 0.0;
    double interior = 0.0;  // weighted L2_{x,y} of w squared
    double boundary = 0.0;  // int (w|_{y=0})^2 / (beta - eta) dx
    double total() const { return interior + boundary; }
};

struct VorticitySolution {
    Field w, w_boundary, u, v;
    std::vector<EnergyRecord> energy_log;
    nlohmann::json energy_json() const;
};

struct SolverOptions {
    int startup_substeps = 4;  // backward-Euler substeps on the first step
    double energy_ell = 1.0;
    RunLog* log = nullptr;
};

/// Vorticity system with forcing f_tilde (= f / u_tilde_y) and initial data w0.
/// Interior and the dynamic wall equation are stepped together by
/// Peaceman-Rachford splitting (x implicit, then y implicit).
VorticitySolution solve_vorticity(const BackgroundState& bg, const Field& f_tilde, const Field* w0,
                                  const SolverOptions& opt = {});

/// Zero data, forcing f (divided by u_tilde_y internally).
VorticitySolution solve_case_I(const BackgroundState& bg, const Field& f, const SolverOptions& opt = {});
/// Zero forcing, initial vorticity w0 (only the t = 0 slice is read).
VorticitySolution solve_case_II(const BackgroundState& bg, const Field& w0, const SolverOptions& opt = {});

/// u = -u_tilde_y * int_y^Ymax w.
Field recover_u(const Field& w, const BackgroundState& bg, RunLog* log = nullptr);
/// u = u_tilde_y * (w(0) / (beta - eta(0)) + int_0^y w). The Robin condition fixes
/// u / u_tilde_y at the wall, so u / u_tilde_y need not vanish at Y_max (it does
/// not when v stays nonzero far out and advects the shear).
Field recover_u_from_wall(const Field& w, const BackgroundState& bg);
/// v = -int_0^y u_x.
Field recover_v(const Field& u);

/// w = (u / u_tilde_y)_y for a velocity perturbation u.
Field vorticity_of(const Field& u, const BackgroundState& bg);

/// Closed-form test problem: analytic coefficients (beta = 2), exact
/// vorticity t sin(2 pi x / L_x)(a + y)e^{-y} with a = wall_offset, and the
/// forcing that makes it solve the system (tail beyond Y_max neglected).
struct ManufacturedCase {
    BackgroundState bg;
    Field f_tilde, w_exact, u_exact;
};
ManufacturedCase manufactured_case(const GridSpec& g, double wall_offset = 0.0);

}  // namespace prandtl
