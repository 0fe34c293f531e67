#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace motlab {

/// Cell-centered tensor-product grid on [0,L1]x...x[0,Ld], d in 1..3.
/// Cell k along an axis with spacing h has center (k + 1/2)*h.  Fields are
/// stored row-major with axis 0 slowest (C order).
struct Grid {
    int dim = 0;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> extents{0.0, 0.0, 0.0};
    std::array<double, 3> spacing{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> strides{0, 0, 0};
    std::int64_t total = 0;
    double cell_volume = 0.0;
    double volume = 0.0;

    double center(int axis, int index) const {
        return (static_cast<double>(index) + 0.5) * spacing[axis];
    }
    bool same_shape(const Grid& other) const {
        return dim == other.dim && cells == other.cells && extents == other.extents;
    }
};

using Field = std::vector<double>;

/// Validates extents/cell counts and precomputes spacing, strides and volumes.
/// Throws std::invalid_argument for dim outside 1..3, non-positive extents or
/// fewer than two cells on any axis.
Grid build_grid(int dim, std::span<const double> extents, std::span<const int> cells);

Field make_field(const Grid& grid, double value = 0.0);

/// Midpoint-rule integral  sum_i f_i * cell_volume  (compensated summation).
double integrate(const Grid& grid, std::span<const double> f);

/// Discrete Neumann Laplacian: second differences per axis with ghost-cell
/// reflection at the boundary (no-flux closure).  Annihilates constants
/// exactly and sums to zero against the midpoint quadrature.
void neumann_laplacian(const Grid& grid, std::span<const double> f, std::span<double> out);
Field neumann_laplacian(const Grid& grid, std::span<const double> f);

/// Cellwise |grad f|^2: squared face differences averaged onto cells, with
/// boundary-normal faces contributing zero (consistent with the Neumann
/// closure).
void gradient_sq(const Grid& grid, std::span<const double> f, std::span<double> out);
Field gradient_sq(const Grid& grid, std::span<const double> f);

/// Centered difference along one axis at cell centers, ghost-cell reflection
/// at the boundary.  Used by the weak-form residual quadrature.
void centered_gradient(const Grid& grid, std::span<const double> f, int axis,
                       std::span<double> out);

/// A^{-1/2} f for A = -Laplacian + I, evaluated exactly on the stencil's
/// cosine eigenbasis (per-axis dense DCT; eigenvalue of mode k on an axis is
/// (2/h^2)(1 - cos(pi k / N))).
void apply_A_inv_sqrt(const Grid& grid, std::span<const double> f, std::span<double> out);
Field apply_A_inv_sqrt(const Grid& grid, std::span<const double> f);

/// Eigenvalue of the one-axis Neumann stencil for mode k (0 <= k < cells).
double neumann_mode_eigenvalue(double spacing, int cells, int mode);

}  // namespace motlab
