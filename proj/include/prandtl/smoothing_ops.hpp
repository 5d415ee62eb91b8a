#pragma once

#include <vector>

#include "prandtl/fit.hpp"
#include "prandtl/grid_field.hpp"

namespace prandtl {

/// Fill policy below the wall: zero, even reflection or odd reflection,
/// the reflections truncated to the band (-1/theta, 0).
enum class ExtensionKind { zero, even, odd };

/// Sign of the temporal shift. `past` samples t - tau - 1/theta (history
/// preserving), `future` the literal t - tau + 1/theta.
enum class ShiftSign { past, future };

const char* to_string(ShiftSign s);
const char* to_string(ExtensionKind k);

struct Mollifier {
    double theta = 10.0;
    ShiftSign t_shift = ShiftSign::past;
    bool y_shift = true;  // +1/theta in y (zero-extension smoother only)

    /// Unnormalized bump exp(-1/(1 - tau^2)) on (-1, 1).
    static double bump(double tau);
    /// Discrete weights for offsets r = r_min, r_min+1, ... (sample index i - r),
    /// normalized to unit sum.
    std::vector<double> weights(double h, double shift, int& r_min) const;
};

/// Throws StructuralError unless 1/theta >= 2 * max spacing.
void check_resolvable(const GridSpec& g, double theta);

/// f on the enlarged y range [-pad*dy, Y_max], pad*dy > 1/theta.
struct ExtendedField {
    std::size_t pad = 0;
    Field values;  // grid with n_y + pad nodes, node j at y = (j - pad) dy
    double at(std::size_t it, std::size_t ix, long iy) const {
        return values(it, ix, static_cast<std::size_t>(iy + static_cast<long>(pad)));
    }
};
ExtendedField extend(const Field& f, ExtensionKind kind, double theta);

/// Tensor-product mollification of the extended field. Zero extension uses
/// zero fill outside [0, T]; the reflected kinds continue the end slices.
/// Above Y_max every kind continues quadratically from the last three nodes.
Field smooth(const Field& f, const Mollifier& m, ExtensionKind kind);

Field smooth_S(const Field& f, double theta, ShiftSign sign = ShiftSign::past);
Field smooth_Su(const Field& u, double theta, ShiftSign sign = ShiftSign::past);
Field smooth_Sv(const Field& v, double theta, ShiftSign sign = ShiftSign::past);

/// max |(S^u u)_x + (S^v v)_y|. Throws DomainError if the input pair is not
/// discretely divergence free within incoming_tol (negative: automatic) or v(0) != 0.
double verify_divergence_preservation(const Field& u, const Field& v, double theta,
                                      ShiftSign sign = ShiftSign::past, double incoming_tol = -1.0);

enum class ExponentProbe {
    smoothing,     // ||S f||_{A^s} / ||f||_{A^alpha}
    approximation  // ||(1 - S) f||_{A^s} / ||f||_{A^alpha}
};

struct ExponentFit {
    std::vector<double> thetas, ratios;  // worst ratio over the family per theta
    LineFit fit;
    double exponent() const { return fit.slope; }
};

ExponentFit measure_operator_exponents(const std::vector<Field>& family, ExponentProbe probe, int s, int alpha,
                                       const std::vector<double>& thetas, double ell = 1.0,
                                       ShiftSign sign = ShiftSign::past);

/// ||S(g f) - g S(f)||_{A^k}: commutator of the smoother with multiplication by g.
double commutator_gap(const Field& f, const Field& g, double theta, int k, double ell = 1.0);

}  // namespace prandtl
