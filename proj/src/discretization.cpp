#include "npsd/discretization.hpp"

namespace npsd {

ReductionMap ReductionMap::from_image(const IndicatorImage& I) {
    ReductionMap m;
    m.full_size = I.cells();
    m.full_to_reduced.assign(static_cast<std::size_t>(m.full_size), -1);
    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x) {
            if (cell_type(I, x, y) == CellType::fluid) {
                const index_t idx = y * I.nx + x;
                m.full_to_reduced[static_cast<std::size_t>(idx)] =
                    static_cast<index_t>(m.fluid_indices.size());
                m.fluid_indices.push_back(idx);
            }
        }
    return m;
}

SparseMatrix assemble_poisson(const IndicatorImage& I) {
    const index_t nx = I.nx, ny = I.ny;
    const index_t n = nx * ny;
    SparseMatrix A;
    A.n_rows = A.n_cols = n;
    A.symmetric = true;
    A.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);

    // neighbor offsets in ascending linear-index order
    const index_t dxs[4] = {0, -1, 1, 0};
    const index_t dys[4] = {-1, 0, 0, 1};

    for (index_t y = 0; y < ny; ++y)
        for (index_t x = 0; x < nx; ++x) {
            const index_t row = y * nx + x;
            if (cell_type(I, x, y) != CellType::fluid) {
                A.row_offsets[static_cast<std::size_t>(row) + 1] =
                    A.row_offsets[static_cast<std::size_t>(row)];
                continue;
            }
            index_t diag = 0;
            index_t lower_cols[2];
            index_t upper_cols[2];
            int n_lower = 0, n_upper = 0;
            for (int k = 0; k < 4; ++k) {
                const CellType t = cell_type_clamped(I, x + dxs[k], y + dys[k]);
                if (t == CellType::solid) continue;
                ++diag;  // fluid or air neighbor counts toward the diagonal
                if (t == CellType::fluid) {
                    const index_t col = (y + dys[k]) * nx + (x + dxs[k]);
                    if (col < row)
                        lower_cols[n_lower++] = col;
                    else
                        upper_cols[n_upper++] = col;
                }
            }
            for (int k = 0; k < n_lower; ++k) {
                A.col_indices.push_back(lower_cols[k]);
                A.values.push_back(-1.0);
            }
            if (diag > 0) {
                A.col_indices.push_back(row);
                A.values.push_back(static_cast<double>(diag));
            }
            for (int k = 0; k < n_upper; ++k) {
                A.col_indices.push_back(upper_cols[k]);
                A.values.push_back(-1.0);
            }
            A.row_offsets[static_cast<std::size_t>(row) + 1] =
                static_cast<index_t>(A.col_indices.size());
        }
    return A;
}

SparseMatrix assemble_poisson_3d(const IndicatorVolume& V) {
    const index_t nx = V.nx, ny = V.ny, nz = V.nz;
    const index_t n = nx * ny * nz;
    SparseMatrix A;
    A.n_rows = A.n_cols = n;
    A.symmetric = true;
    A.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);

    const index_t dxs[6] = {0, 0, -1, 1, 0, 0};
    const index_t dys[6] = {0, -1, 0, 0, 1, 0};
    const index_t dzs[6] = {-1, 0, 0, 0, 0, 1};

    for (index_t z = 0; z < nz; ++z)
        for (index_t y = 0; y < ny; ++y)
            for (index_t x = 0; x < nx; ++x) {
                const index_t row = (z * ny + y) * nx + x;
                if (V.at_clamped(x, y, z) != CellType::fluid) {
                    A.row_offsets[static_cast<std::size_t>(row) + 1] =
                        A.row_offsets[static_cast<std::size_t>(row)];
                    continue;
                }
                index_t diag = 0;
                index_t lower_cols[3], upper_cols[3];
                int n_lower = 0, n_upper = 0;
                for (int k = 0; k < 6; ++k) {
                    const CellType t = V.at_clamped(x + dxs[k], y + dys[k], z + dzs[k]);
                    if (t == CellType::solid) continue;
                    ++diag;
                    if (t == CellType::fluid) {
                        const index_t col = ((z + dzs[k]) * ny + (y + dys[k])) * nx + (x + dxs[k]);
                        if (col < row)
                            lower_cols[n_lower++] = col;
                        else
                            upper_cols[n_upper++] = col;
                    }
                }
                for (int k = 0; k < n_lower; ++k) {
                    A.col_indices.push_back(lower_cols[k]);
                    A.values.push_back(-1.0);
                }
                if (diag > 0) {
                    A.col_indices.push_back(row);
                    A.values.push_back(static_cast<double>(diag));
                }
                for (int k = 0; k < n_upper; ++k) {
                    A.col_indices.push_back(upper_cols[k]);
                    A.values.push_back(-1.0);
                }
                A.row_offsets[static_cast<std::size_t>(row) + 1] =
                    static_cast<index_t>(A.col_indices.size());
            }
    return A;
}

ReducedSystem reduce(const SparseMatrix& A_full, const Vector& b_full, const IndicatorImage& I) {
    require(A_full.n_rows == I.cells() && A_full.n_cols == I.cells(),
            "reduce: matrix does not match image cell count");
    require(static_cast<index_t>(b_full.size()) == I.cells(), "reduce: rhs length mismatch");

    ReducedSystem sys;
    sys.map = ReductionMap::from_image(I);
    const index_t nf = sys.map.reduced_size();
    if (nf == 0) throw EmptySystemError("reduce: image has no fluid cells");

    sys.A.n_rows = sys.A.n_cols = nf;
    sys.A.symmetric = A_full.symmetric;
    sys.A.row_offsets.assign(static_cast<std::size_t>(nf) + 1, 0);
    for (index_t r = 0; r < nf; ++r) {
        const index_t full_row = sys.map.fluid_indices[static_cast<std::size_t>(r)];
        index_t count = 0;
        for (index_t k = A_full.row_offsets[static_cast<std::size_t>(full_row)];
             k < A_full.row_offsets[static_cast<std::size_t>(full_row) + 1]; ++k) {
            const index_t rj = sys.map.full_to_reduced[static_cast<std::size_t>(
                A_full.col_indices[static_cast<std::size_t>(k)])];
            if (rj < 0) continue;
            sys.A.col_indices.push_back(rj);
            sys.A.values.push_back(A_full.values[static_cast<std::size_t>(k)]);
            ++count;
        }
        if (count == 0) ++sys.empty_rows;
        sys.A.row_offsets[static_cast<std::size_t>(r) + 1] =
            static_cast<index_t>(sys.A.col_indices.size());
    }
    sys.b = restrict_vector(b_full, sys.map);
    return sys;
}

Vector pad_vector(const Vector& v_reduced, const ReductionMap& map) {
    require(static_cast<index_t>(v_reduced.size()) == map.reduced_size(),
            "pad_vector: length mismatch");
    Vector out(static_cast<std::size_t>(map.full_size), 0.0);
    for (std::size_t r = 0; r < v_reduced.size(); ++r)
        out[static_cast<std::size_t>(map.fluid_indices[r])] = v_reduced[r];
    return out;
}

Vector restrict_vector(const Vector& v_full, const ReductionMap& map) {
    require(static_cast<index_t>(v_full.size()) == map.full_size,
            "restrict_vector: length mismatch");
    Vector out(static_cast<std::size_t>(map.reduced_size()));
    for (std::size_t r = 0; r < out.size(); ++r)
        out[r] = v_full[static_cast<std::size_t>(map.fluid_indices[r])];
    return out;
}

bool is_pure_neumann(const IndicatorImage& I) {
    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x) {
            if (cell_type(I, x, y) != CellType::fluid) continue;
            if (cell_type_clamped(I, x - 1, y) == CellType::air ||
                cell_type_clamped(I, x + 1, y) == CellType::air ||
                cell_type_clamped(I, x, y - 1) == CellType::air ||
                cell_type_clamped(I, x, y + 1) == CellType::air)
                return false;
        }
    return true;
}

Vector mac_divergence_rhs(const MacVelocity& vel, const IndicatorImage& I,
                          const BoundaryVelocity* bc) {
    require(vel.nx == I.nx && vel.ny == I.ny, "mac_divergence_rhs: shape mismatch");
    require(vel.u.nx == I.nx + 1 && vel.u.ny == I.ny && vel.v.nx == I.nx && vel.v.ny == I.ny + 1,
            "mac_divergence_rhs: inconsistent face arrays");
    if (bc) {
        require(bc->u.same_shape(vel.u) && bc->v.same_shape(vel.v),
                "mac_divergence_rhs: boundary value shape mismatch");
    }

    Vector b(static_cast<std::size_t>(I.cells()), 0.0);
    const double scale = -(vel.rho * vel.h) / vel.dt;

    auto u_face = [&](index_t fx, index_t fy, index_t nbx, index_t nby) {
        if (cell_type_clamped(I, nbx, nby) == CellType::solid)
            return bc ? bc->u.at(fx, fy) : 0.0;
        return vel.u.at(fx, fy);
    };
    auto v_face = [&](index_t fx, index_t fy, index_t nbx, index_t nby) {
        if (cell_type_clamped(I, nbx, nby) == CellType::solid)
            return bc ? bc->v.at(fx, fy) : 0.0;
        return vel.v.at(fx, fy);
    };

    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x) {
            if (cell_type(I, x, y) != CellType::fluid) continue;
            const double uR = u_face(x + 1, y, x + 1, y);
            const double uL = u_face(x, y, x - 1, y);
            const double vT = v_face(x, y + 1, x, y + 1);
            const double vB = v_face(x, y, x, y - 1);
            b[static_cast<std::size_t>(y * I.nx + x)] = scale * ((uR - uL) + (vT - vB));
        }
    return b;
}

}  // namespace npsd
