#pragma once

#include "npsd/sparse.hpp"
#include "npsd/types.hpp"

namespace npsd {

/// Row-major dense matrix, test-scale only.
struct DenseMatrix {
    index_t n_rows = 0, n_cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : n_rows(r), n_cols(c), a(static_cast<std::size_t>(r * c), 0.0) {}

    double& at(index_t i, index_t j) { return a[static_cast<std::size_t>(i * n_cols + j)]; }
    double at(index_t i, index_t j) const { return a[static_cast<std::size_t>(i * n_cols + j)]; }

    static DenseMatrix from_sparse(const SparseMatrix& A);
};

struct CholeskyResult {
    bool spd = false;
    DenseMatrix L;          // lower factor, valid only when spd
    index_t failed_pivot = -1;  // row of the first non-positive pivot otherwise
};

/// LL^T factorization of a symmetric matrix; signals "not SPD" instead of
/// throwing so callers can use it as a definiteness probe.
CholeskyResult dense_cholesky(const DenseMatrix& A);

/// Solves A x = b given the lower factor from dense_cholesky.
Vector cholesky_solve(const DenseMatrix& L, const Vector& b);

/// Eigendecomposition of a symmetric tridiagonal matrix (implicit-shift QL).
/// diag has length n, offdiag length n-1. Returns ascending eigenvalues and,
/// in `vectors`, the orthonormal eigenvector matrix column-by-column
/// (vectors[k] is the eigenvector for values[k]).
struct TridiagEigenResult {
    std::vector<double> values;
    std::vector<Vector> vectors;
};
TridiagEigenResult tridiag_eigen(const std::vector<double>& diag,
                                 const std::vector<double>& offdiag);

}  // namespace npsd
