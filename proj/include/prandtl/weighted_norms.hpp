#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prandtl/grid_field.hpp"

namespace prandtl {

struct BackgroundState;
struct ShearProfile;

using IndexPair = std::pair<int, int>;

/// Pairs (k1, k2) with k1 + floor((k2+1)/2) <= k.
std::vector<IndexPair> index_set(int k);

/// Derivative d_t^a d_x^b d_y^q by repeated grid stencils. d_y^q uses the
/// second-difference stencil floor(q/2) times and the first-difference stencil q mod 2 times.
Field mixed_derivative(const Field& f, int a_t, int b_x, int q_y);

/// sqrt of the sum over index_set(k) of || <y>^ell d_{t,x}^{k1} d_y^{k2} f ||^2_{L2},
/// where d_{t,x}^{k1} runs over every mixed t/x multi-index of total order k1.
/// homogeneous = true drops the (0,0) term.
double norm_A(const Field& f, int k, double ell, bool homogeneous = false);

/// Boundary-trace norm: sum over m <= k of all order-m mixed t/x derivatives in L2_{t,x}.
double norm_boundary_A(const Field& trace, int k, bool homogeneous = false);

enum class MixedFamily { C, D, B, B_sup };

struct MixedParams {
    int k = 0;
    double ell = 0.0;
    double lambda = 0.0;
    // Rectangle {m <= k1, q <= k2}. B families always use it; C and D use it
    // when set and fall back to index_set(k) otherwise.
    std::optional<IndexPair> rect;
    bool homogeneous = false;
};

/// C: sum of L2_y(Linf_{t,x}); D: sum of Linf_y(L2_{t,x});
/// B: L2 with weight e^{-lambda t}<y>^ell over the rectangle; B_sup: Linf_t variant of B.
double norm_mixed(const Field& f, MixedFamily family, const MixedParams& p);

/// max over (t,x) of |d_t^a d_x^b trace| summed over a+b = m, m <= k.
double trace_sup_sum(const Field& trace, int k);

struct NormReport {
    std::map<std::string, double> values;
    std::map<std::string, bool> homogeneous;

    void put(const std::string& key, double v, bool homog = false) {
        values[key] = v;
        homogeneous[key] = homog;
    }
    double at(const std::string& key) const { return values.at(key); }
    nlohmann::json to_json() const;

    static std::string key_A(int k, double ell);
    static std::string key_Ab(int k);
    static std::string key_B(double lambda, double ell, int k1, int k2);
    static std::string key_C(int k, double ell);
    static std::string key_D(int k, double ell);
};

/// Every family for orders 0..k_max with weight ell (B with lambda = 0 over {k, 2k}).
NormReport evaluate_norms(const Field& f, int k_max, double ell);

struct LambdaReport {
    std::map<IndexPair, double> lambda_interior;
    std::map<int, double> lambda_boundary;
    std::map<int, double> lambda_total;
    std::map<std::string, double> summands;  // every individual term, for inspection
    nlohmann::json to_json() const;
};

/// Coefficient-size diagnostics of one background. ell weights the zeta term.
LambdaReport lambda_diagnostics(const BackgroundState& bg, const ShearProfile& shear, int k, double ell = 1.0);

}  // namespace prandtl
