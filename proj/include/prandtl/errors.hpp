#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prandtl {

// Shape or resolution mismatch between inputs and the grid.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (t <= 0, beta <= 0, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Blow-up, NaN, or a solver producing garbage.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The background lost the margin beta - eta >= delta (or u_y > 0) somewhere.
struct MonotonicityError : NumericalError {
    MonotonicityError(const std::string& what, std::size_t it, std::size_t ix, std::size_t iy,
                      double margin)
        : NumericalError(what), it(it), ix(ix), iy(iy), margin(margin) {}
    std::size_t it, ix, iy;
    double margin;
};

}  // namespace prandtl
