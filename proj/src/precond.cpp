#include "npsd/precond.hpp"

#include <cmath>

namespace npsd {

void IdentityPrecond::apply(const Vector& r, Vector& z) const {
    require(static_cast<index_t>(r.size()) == n_, "identity precond: size mismatch");
    z = r;
}

JacobiPrecond::JacobiPrecond(const SparseMatrix& A) {
    require(A.n_rows == A.n_cols, "jacobi precond: matrix not square");
    inv_diag_.resize(static_cast<std::size_t>(A.n_rows));
    for (index_t i = 0; i < A.n_rows; ++i) {
        const double d = A.diag(i);
        require(d != 0.0, "jacobi precond: zero diagonal at row " + std::to_string(i));
        inv_diag_[static_cast<std::size_t>(i)] = 1.0 / d;
    }
}

void JacobiPrecond::apply(const Vector& r, Vector& z) const {
    require(r.size() == inv_diag_.size(), "jacobi precond: size mismatch");
    z.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] * inv_diag_[i];
}

Ic0Precond::Ic0Precond(const SparseMatrix& A) {
    require(A.n_rows == A.n_cols, "ic0: matrix not square");
    n_ = A.n_rows;

    double diag_mean = 0.0;
    for (index_t i = 0; i < n_; ++i) diag_mean += A.diag(i);
    diag_mean /= static_cast<double>(std::max<index_t>(n_, 1));

    double shift = 0.0;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        if (try_factorize(A, shift)) {
            shift_retries_ = attempt;
            return;
        }
        shift = (shift == 0.0) ? 1e-3 * diag_mean : 2.0 * shift;
    }
    throw std::runtime_error("ic0: factorization failed after diagonal-shift retries");
}

bool Ic0Precond::try_factorize(const SparseMatrix& A, double shift) {
    // L has the sparsity of lower(A), including the diagonal.
    L_ = SparseMatrix{};
    L_.n_rows = L_.n_cols = n_;
    L_.row_offsets.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (index_t i = 0; i < n_; ++i) {
        for (index_t k = A.row_offsets[static_cast<std::size_t>(i)];
             k < A.row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const index_t j = A.col_indices[static_cast<std::size_t>(k)];
            if (j > i) break;
            double v = A.values[static_cast<std::size_t>(k)];
            if (j == i) v += shift;
            L_.col_indices.push_back(j);
            L_.values.push_back(v);
        }
        L_.row_offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(L_.col_indices.size());
    }

    // in-place up-looking factorization restricted to the pattern
    for (index_t i = 0; i < n_; ++i) {
        const index_t row_begin = L_.row_offsets[static_cast<std::size_t>(i)];
        const index_t row_end = L_.row_offsets[static_cast<std::size_t>(i) + 1];
        if (row_begin == row_end) return false;  // structurally empty row
        if (L_.col_indices[static_cast<std::size_t>(row_end) - 1] != i)
            return false;  // no diagonal in pattern
        for (index_t k = row_begin; k < row_end; ++k) {
            const index_t j = L_.col_indices[static_cast<std::size_t>(k)];
            double sum = L_.values[static_cast<std::size_t>(k)];
            // subtract sum_{t<j} L_it * L_jt over the shared pattern
            index_t pi = row_begin;
            index_t pj = L_.row_offsets[static_cast<std::size_t>(j)];
            const index_t pj_end = L_.row_offsets[static_cast<std::size_t>(j) + 1];
            while (pi < k && pj < pj_end) {
                const index_t ci = L_.col_indices[static_cast<std::size_t>(pi)];
                const index_t cj = L_.col_indices[static_cast<std::size_t>(pj)];
                if (cj >= j) break;
                if (ci == cj) {
                    sum -= L_.values[static_cast<std::size_t>(pi)] *
                           L_.values[static_cast<std::size_t>(pj)];
                    ++pi;
                    ++pj;
                } else if (ci < cj) {
                    ++pi;
                } else {
                    ++pj;
                }
            }
            if (j == i) {
                if (sum <= 0.0) return false;
                L_.values[static_cast<std::size_t>(k)] = std::sqrt(sum);
            } else {
                const index_t dj = L_.row_offsets[static_cast<std::size_t>(j) + 1] - 1;
                L_.values[static_cast<std::size_t>(k)] =
                    sum / L_.values[static_cast<std::size_t>(dj)];
            }
        }
    }
    return true;
}

void Ic0Precond::apply(const Vector& r, Vector& z) const {
    require(static_cast<index_t>(r.size()) == n_, "ic0: size mismatch");
    z = r;
    // forward solve L y = r
    for (index_t i = 0; i < n_; ++i) {
        const index_t row_begin = L_.row_offsets[static_cast<std::size_t>(i)];
        const index_t row_end = L_.row_offsets[static_cast<std::size_t>(i) + 1];
        double s = z[static_cast<std::size_t>(i)];
        for (index_t k = row_begin; k < row_end - 1; ++k)
            s -= L_.values[static_cast<std::size_t>(k)] *
                 z[static_cast<std::size_t>(L_.col_indices[static_cast<std::size_t>(k)])];
        z[static_cast<std::size_t>(i)] = s / L_.values[static_cast<std::size_t>(row_end) - 1];
    }
    // backward solve L^T z = y, scattering row contributions
    for (index_t j = n_ - 1; j >= 0; --j) {
        const index_t row_begin = L_.row_offsets[static_cast<std::size_t>(j)];
        const index_t row_end = L_.row_offsets[static_cast<std::size_t>(j) + 1];
        const double zj = z[static_cast<std::size_t>(j)] / L_.values[static_cast<std::size_t>(row_end) - 1];
        z[static_cast<std::size_t>(j)] = zj;
        for (index_t k = row_begin; k < row_end - 1; ++k)
            z[static_cast<std::size_t>(L_.col_indices[static_cast<std::size_t>(k)])] -=
                L_.values[static_cast<std::size_t>(k)] * zj;
    }
}

std::unique_ptr<Preconditioner> identity_precond(index_t n) {
    return std::make_unique<IdentityPrecond>(n);
}
std::unique_ptr<Preconditioner> jacobi_precond(const SparseMatrix& A) {
    return std::make_unique<JacobiPrecond>(A);
}
std::unique_ptr<Preconditioner> ic0_precond(const SparseMatrix& A) {
    return std::make_unique<Ic0Precond>(A);
}

}  // namespace npsd
