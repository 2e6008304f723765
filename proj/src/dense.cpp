#include "npsd/dense.hpp"

#include <algorithm>
#include <cmath>

namespace npsd {

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& A) {
    DenseMatrix D(A.n_rows, A.n_cols);
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t k = A.row_offsets[static_cast<std::size_t>(i)]; k < A.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
            D.at(i, A.col_indices[static_cast<std::size_t>(k)]) = A.values[static_cast<std::size_t>(k)];
    return D;
}

CholeskyResult dense_cholesky(const DenseMatrix& A) {
    require(A.n_rows == A.n_cols, "dense_cholesky: matrix not square");
    const index_t n = A.n_rows;
    CholeskyResult res;
    res.L = DenseMatrix(n, n);
    for (index_t j = 0; j < n; ++j) {
        double d = A.at(j, j);
        for (index_t k = 0; k < j; ++k) d -= res.L.at(j, k) * res.L.at(j, k);
        if (d <= 0.0) {
            res.spd = false;
            res.failed_pivot = j;
            return res;
        }
        const double ljj = std::sqrt(d);
        res.L.at(j, j) = ljj;
        for (index_t i = j + 1; i < n; ++i) {
            double s = A.at(i, j);
            for (index_t k = 0; k < j; ++k) s -= res.L.at(i, k) * res.L.at(j, k);
            res.L.at(i, j) = s / ljj;
        }
    }
    res.spd = true;
    return res;
}

Vector cholesky_solve(const DenseMatrix& L, const Vector& b) {
    const index_t n = L.n_rows;
    require(static_cast<index_t>(b.size()) == n, "cholesky_solve: size mismatch");
    Vector y(b);
    for (index_t i = 0; i < n; ++i) {
        double s = y[static_cast<std::size_t>(i)];
        for (index_t k = 0; k < i; ++k) s -= L.at(i, k) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / L.at(i, i);
    }
    for (index_t i = n - 1; i >= 0; --i) {
        double s = y[static_cast<std::size_t>(i)];
        for (index_t k = i + 1; k < n; ++k) s -= L.at(k, i) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / L.at(i, i);
    }
    return y;
}

// Implicit-shift QL iteration on a symmetric tridiagonal matrix, rotations
// accumulated into the eigenvector matrix.
TridiagEigenResult tridiag_eigen(const std::vector<double>& diag,
                                 const std::vector<double>& offdiag) {
    const index_t n = static_cast<index_t>(diag.size());
    require(offdiag.size() + 1 == diag.size() || (n == 0 && offdiag.empty()),
            "tridiag_eigen: offdiag must have length n-1");
    TridiagEigenResult out;
    if (n == 0) return out;

    std::vector<double> d = diag;
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(n); ++i) e[i] = offdiag[i];

    // z: eigenvector accumulation, row-major n x n, initialized to identity
    std::vector<double> z(static_cast<std::size_t>(n * n), 0.0);
    for (index_t i = 0; i < n; ++i) z[static_cast<std::size_t>(i * n + i)] = 1.0;

    auto zref = [&](index_t r, index_t c) -> double& { return z[static_cast<std::size_t>(r * n + c)]; };
    auto dref = [&](index_t i) -> double& { return d[static_cast<std::size_t>(i)]; };
    auto eref = [&](index_t i) -> double& { return e[static_cast<std::size_t>(i)]; };

    for (index_t l = 0; l < n; ++l) {
        int iter = 0;
        index_t m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(dref(m)) + std::abs(dref(m + 1));
                if (std::abs(eref(m)) <= 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("tridiag_eigen: too many QL iterations");
                double g = (dref(l + 1) - dref(l)) / (2.0 * eref(l));
                double r = std::hypot(g, 1.0);
                g = dref(m) - dref(l) + eref(l) / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                index_t i = m - 1;
                bool underflow = false;
                for (; i >= l; --i) {
                    double f = s * eref(i);
                    const double b = c * eref(i);
                    r = std::hypot(f, g);
                    eref(i + 1) = r;
                    if (r == 0.0) {
                        dref(i + 1) -= p;
                        eref(m) = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = dref(i + 1) - p;
                    r = (dref(i) - g) * s + 2.0 * c * b;
                    p = s * r;
                    dref(i + 1) = g + p;
                    g = c * r - b;
                    for (index_t k = 0; k < n; ++k) {
                        f = zref(k, i + 1);
                        zref(k, i + 1) = s * zref(k, i) + c * f;
                        zref(k, i) = c * zref(k, i) - s * f;
                    }
                }
                if (underflow && i >= l) continue;
                dref(l) -= p;
                eref(l) = g;
                eref(m) = 0.0;
            }
        } while (m != l);
    }

    // sort ascending, permute eigenvectors accordingly
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::sort(perm.begin(), perm.end(),
              [&](index_t a, index_t b) { return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)]; });

    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.resize(static_cast<std::size_t>(n));
    for (index_t c = 0; c < n; ++c) {
        const index_t src = perm[static_cast<std::size_t>(c)];
        out.values[static_cast<std::size_t>(c)] = d[static_cast<std::size_t>(src)];
        Vector v(static_cast<std::size_t>(n));
        for (index_t r = 0; r < n; ++r) v[static_cast<std::size_t>(r)] = z[static_cast<std::size_t>(r * n + src)];
        out.vectors[static_cast<std::size_t>(c)] = std::move(v);
    }
    return out;
}

}  // namespace npsd
