#pragma once

#include "npsd/scene.hpp"
#include "npsd/sparse.hpp"
#include "npsd/types.hpp"

namespace npsd {

/// Index bookkeeping between the full n_c-cell grid and the reduced n_f
/// fluid-only system.
struct ReductionMap {
    index_t full_size = 0;
    std::vector<index_t> fluid_indices;    // strictly increasing, length n_f
    std::vector<index_t> full_to_reduced;  // length n_c, -1 at non-fluid cells

    index_t reduced_size() const { return static_cast<index_t>(fluid_indices.size()); }

    static ReductionMap from_image(const IndicatorImage& I);
};

/// Assembles the full n_c x n_c mixed-BC discrete Laplacian from a one-hot
/// image with unit stencil coefficients: each fluid neighbor contributes an
/// off-diagonal -1, the diagonal counts neighbors in fluid-or-air, and solid
/// neighbors (including the domain boundary) contribute nothing. Non-fluid
/// rows and columns are empty.
SparseMatrix assemble_poisson(const IndicatorImage& I);

/// 3D variant on a 7-point stencil; assembly-only support.
struct IndicatorVolume {
    index_t nx = 0, ny = 0, nz = 0;
    std::vector<CellType> cells;  // (z*ny + y)*nx + x

    IndicatorVolume() = default;
    IndicatorVolume(index_t nx_, index_t ny_, index_t nz_, CellType fill = CellType::fluid)
        : nx(nx_), ny(ny_), nz(nz_), cells(static_cast<std::size_t>(nx_ * ny_ * nz_), fill) {}

    CellType& at(index_t x, index_t y, index_t z) {
        return cells[static_cast<std::size_t>((z * ny + y) * nx + x)];
    }
    CellType at_clamped(index_t x, index_t y, index_t z) const {
        if (x < 0 || x >= nx || y < 0 || y >= ny || z < 0 || z >= nz) return CellType::solid;
        return cells[static_cast<std::size_t>((z * ny + y) * nx + x)];
    }
};
SparseMatrix assemble_poisson_3d(const IndicatorVolume& V);

struct ReducedSystem {
    SparseMatrix A;    // n_f x n_f, symmetric
    Vector b;          // length n_f
    ReductionMap map;
    index_t empty_rows = 0;  // fluid rows with no entries (structurally singular)
};

/// Deletes non-fluid rows/columns. Throws EmptySystemError when the image
/// has no fluid cells.
ReducedSystem reduce(const SparseMatrix& A_full, const Vector& b_full, const IndicatorImage& I);

/// Zeros inserted at non-fluid locations / non-fluid entries dropped.
/// restrict_vector(pad_vector(v)) == v exactly.
Vector pad_vector(const Vector& v_reduced, const ReductionMap& map);
Vector restrict_vector(const Vector& v_full, const ReductionMap& map);

/// True when no fluid cell borders an air cell (pure-Neumann regime, so the
/// reduced operator has the constant vector in its nullspace per component).
bool is_pure_neumann(const IndicatorImage& I);

/// Face-staggered MAC velocity field: u on x-faces ((nx+1) x ny), v on
/// y-faces (nx x (ny+1)), with the grid spacing, time step and density that
/// scale the pressure solve.
struct MacVelocity {
    index_t nx = 0, ny = 0;
    Field2D<double> u, v;
    double h = 1.0;
    double dt = 0.05;
    double rho = 1.0;

    MacVelocity() = default;
    MacVelocity(index_t nx_, index_t ny_, double h_ = 1.0, double dt_ = 0.05, double rho_ = 1.0)
        : nx(nx_), ny(ny_), u(nx_ + 1, ny_), v(nx_, ny_ + 1), h(h_), dt(dt_), rho(rho_) {}
};

/// Prescribed normal velocity on Neumann (fluid-solid and domain-boundary)
/// faces; null/empty means zero everywhere (static solids).
struct BoundaryVelocity {
    Field2D<double> u, v;  // same shapes as the MacVelocity components
};

/// Discrete MAC divergence right-hand side on the full grid, scaled to match
/// the unit-coefficient stencil: b_cell = -(rho*h/dt) * (sum of signed face
/// velocities). Faces whose opposite cell is solid (or outside the domain)
/// use the prescribed boundary value instead of the face velocity. Non-fluid
/// cells get 0.
Vector mac_divergence_rhs(const MacVelocity& vel, const IndicatorImage& I,
                          const BoundaryVelocity* bc = nullptr);

}  // namespace npsd
