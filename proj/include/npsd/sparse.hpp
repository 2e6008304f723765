#pragma once

#include <string>

#include "npsd/types.hpp"

namespace npsd {

/// Symmetric sparse operator in CSR layout. Column indices are strictly
/// increasing within each row; row_offsets has n_rows+1 entries.
struct SparseMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<index_t> row_offsets;  // length n_rows + 1
    std::vector<index_t> col_indices;  // length nnz
    std::vector<double> values;        // length nnz
    bool symmetric = false;

    index_t nnz() const { return static_cast<index_t>(values.size()); }

    static SparseMatrix identity(index_t n);

    /// Builds from unsorted (i, j, v) triplets; duplicate entries are summed.
    static SparseMatrix from_triplets(index_t n_rows, index_t n_cols,
                                      const std::vector<index_t>& is,
                                      const std::vector<index_t>& js,
                                      const std::vector<double>& vs);

    /// Throws if the CSR invariants are violated; checks the symmetric-pair
    /// invariant (bitwise-equal mirrored entries) when `symmetric` is set.
    void validate() const;

    double diag(index_t i) const;
};

/// y = A x, exact per CSR traversal order. Row-parallel and bitwise
/// deterministic for any thread count.
void spmv(const SparseMatrix& A, const Vector& x, Vector& y);
Vector spmv(const SparseMatrix& A, const Vector& x);

/// Triplet text export: one header line "n_rows n_cols nnz", then 0-based
/// "i j v" lines with round-trippable f64 formatting.
void save_triplets(const SparseMatrix& A, const std::string& path);
SparseMatrix load_triplets(const std::string& path);

namespace ref {
/// Serial reference spmv kept for kernel tests and the kernel benchmark.
void spmv_serial(const SparseMatrix& A, const Vector& x, Vector& y);
}  // namespace ref

}  // namespace npsd
