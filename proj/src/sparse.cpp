#include "npsd/sparse.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace npsd {

SparseMatrix SparseMatrix::identity(index_t n) {
    SparseMatrix A;
    A.n_rows = A.n_cols = n;
    A.row_offsets.resize(static_cast<std::size_t>(n) + 1);
    A.col_indices.resize(static_cast<std::size_t>(n));
    A.values.assign(static_cast<std::size_t>(n), 1.0);
    for (index_t i = 0; i <= n; ++i) A.row_offsets[static_cast<std::size_t>(i)] = i;
    std::iota(A.col_indices.begin(), A.col_indices.end(), index_t{0});
    A.symmetric = true;
    return A;
}

SparseMatrix SparseMatrix::from_triplets(index_t n_rows, index_t n_cols,
                                         const std::vector<index_t>& is,
                                         const std::vector<index_t>& js,
                                         const std::vector<double>& vs) {
    require(is.size() == js.size() && js.size() == vs.size(), "from_triplets: length mismatch");
    std::vector<std::size_t> order(is.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (is[a] != is[b]) return is[a] < is[b];
        return js[a] < js[b];
    });

    SparseMatrix A;
    A.n_rows = n_rows;
    A.n_cols = n_cols;
    A.row_offsets.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    index_t prev_i = -1, prev_j = -1;
    for (std::size_t t : order) {
        const index_t i = is[t], j = js[t];
        require(i >= 0 && i < n_rows && j >= 0 && j < n_cols, "from_triplets: index out of range");
        if (i == prev_i && j == prev_j) {
            A.values.back() += vs[t];
            continue;
        }
        A.col_indices.push_back(j);
        A.values.push_back(vs[t]);
        A.row_offsets[static_cast<std::size_t>(i) + 1]++;
        prev_i = i;
        prev_j = j;
    }
    for (index_t i = 0; i < n_rows; ++i)
        A.row_offsets[static_cast<std::size_t>(i) + 1] += A.row_offsets[static_cast<std::size_t>(i)];
    return A;
}

void SparseMatrix::validate() const {
    require(row_offsets.size() == static_cast<std::size_t>(n_rows) + 1, "validate: bad row_offsets length");
    require(row_offsets.front() == 0, "validate: row_offsets[0] != 0");
    require(row_offsets.back() == nnz(), "validate: row_offsets back != nnz");
    for (index_t i = 0; i < n_rows; ++i) {
        require(row_offsets[static_cast<std::size_t>(i)] <= row_offsets[static_cast<std::size_t>(i) + 1],
                "validate: row_offsets not nondecreasing");
        for (index_t k = row_offsets[static_cast<std::size_t>(i)]; k < row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const index_t j = col_indices[static_cast<std::size_t>(k)];
            require(j >= 0 && j < n_cols, "validate: column index out of range");
            if (k > row_offsets[static_cast<std::size_t>(i)])
                require(col_indices[static_cast<std::size_t>(k) - 1] < j,
                        "validate: columns not strictly increasing in row " + std::to_string(i));
        }
    }
    if (symmetric) {
        require(n_rows == n_cols, "validate: symmetric flag on non-square matrix");
        for (index_t i = 0; i < n_rows; ++i) {
            for (index_t k = row_offsets[static_cast<std::size_t>(i)]; k < row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
                const index_t j = col_indices[static_cast<std::size_t>(k)];
                const double v = values[static_cast<std::size_t>(k)];
                // binary search for (j, i)
                const index_t lo = row_offsets[static_cast<std::size_t>(j)];
                const index_t hi = row_offsets[static_cast<std::size_t>(j) + 1];
                auto begin = col_indices.begin() + lo;
                auto end = col_indices.begin() + hi;
                auto it = std::lower_bound(begin, end, i);
                require(it != end && *it == i, "validate: missing symmetric pair");
                const double w = values[static_cast<std::size_t>(lo + (it - begin))];
                require(v == w, "validate: symmetric pair values differ");
            }
        }
    }
}

double SparseMatrix::diag(index_t i) const {
    for (index_t k = row_offsets[static_cast<std::size_t>(i)]; k < row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
        if (col_indices[static_cast<std::size_t>(k)] == i) return values[static_cast<std::size_t>(k)];
    return 0.0;
}

void spmv(const SparseMatrix& A, const Vector& x, Vector& y) {
    require(A.n_cols == static_cast<index_t>(x.size()),
            "spmv: dimension mismatch (A is " + std::to_string(A.n_rows) + "x" +
                std::to_string(A.n_cols) + ", x has " + std::to_string(x.size()) + ")");
    y.resize(static_cast<std::size_t>(A.n_rows));
    const index_t n = A.n_rows;
    const index_t* ro = A.row_offsets.data();
    const index_t* ci = A.col_indices.data();
    const double* va = A.values.data();
    const double* xp = x.data();
    double* yp = y.data();
#pragma omp parallel for schedule(static) if (A.nnz() > 1 << 14)
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (index_t k = ro[i]; k < ro[i + 1]; ++k) s += va[k] * xp[ci[k]];
        yp[i] = s;
    }
}

Vector spmv(const SparseMatrix& A, const Vector& x) {
    Vector y;
    spmv(A, x, y);
    return y;
}

void save_triplets(const SparseMatrix& A, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("save_triplets: cannot open " + path);
    std::fprintf(f, "%" PRId64 " %" PRId64 " %" PRId64 "\n", A.n_rows, A.n_cols, A.nnz());
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t k = A.row_offsets[static_cast<std::size_t>(i)]; k < A.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
            std::fprintf(f, "%" PRId64 " %" PRId64 " %.17g\n", i,
                         A.col_indices[static_cast<std::size_t>(k)], A.values[static_cast<std::size_t>(k)]);
    std::fclose(f);
}

SparseMatrix load_triplets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_triplets: cannot open " + path);
    index_t n_rows = 0, n_cols = 0, nnz = 0;
    in >> n_rows >> n_cols >> nnz;
    if (!in) throw std::runtime_error("load_triplets: malformed header in " + path);
    std::vector<index_t> is, js;
    std::vector<double> vs;
    is.reserve(static_cast<std::size_t>(nnz));
    js.reserve(static_cast<std::size_t>(nnz));
    vs.reserve(static_cast<std::size_t>(nnz));
    for (index_t t = 0; t < nnz; ++t) {
        index_t i = 0, j = 0;
        double v = 0.0;
        in >> i >> j >> v;
        if (!in) throw std::runtime_error("load_triplets: truncated entry list in " + path);
        is.push_back(i);
        js.push_back(j);
        vs.push_back(v);
    }
    return SparseMatrix::from_triplets(n_rows, n_cols, is, js, vs);
}

namespace ref {
void spmv_serial(const SparseMatrix& A, const Vector& x, Vector& y) {
    y.resize(static_cast<std::size_t>(A.n_rows));
    for (index_t i = 0; i < A.n_rows; ++i) {
        double s = 0.0;
        for (index_t k = A.row_offsets[static_cast<std::size_t>(i)]; k < A.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
            s += A.values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(A.col_indices[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = s;
    }
}
}  // namespace ref

}  // namespace npsd
