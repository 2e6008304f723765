#pragma once

#include <memory>

#include "npsd/sparse.hpp"
#include "npsd/types.hpp"

namespace npsd {

/// Uniform "apply to a residual vector" interface shared by the classical
/// baselines and the neural preconditioner.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;

    /// z = P(r). Must be reentrant; output is finite and the same length.
    virtual void apply(const Vector& r, Vector& z) const = 0;

    Vector apply(const Vector& r) const {
        Vector z;
        apply(r, z);
        return z;
    }

    virtual bool is_linear() const = 0;
    virtual bool is_symmetric() const = 0;
    virtual index_t size() const = 0;
    virtual std::string name() const = 0;
};

class IdentityPrecond : public Preconditioner {
public:
    explicit IdentityPrecond(index_t n) : n_(n) {}
    using Preconditioner::apply;
    void apply(const Vector& r, Vector& z) const override;
    bool is_linear() const override { return true; }
    bool is_symmetric() const override { return true; }
    index_t size() const override { return n_; }
    std::string name() const override { return "identity"; }

private:
    index_t n_;
};

/// z = r / diag(A). Throws on a zero diagonal entry.
class JacobiPrecond : public Preconditioner {
public:
    explicit JacobiPrecond(const SparseMatrix& A);
    using Preconditioner::apply;
    void apply(const Vector& r, Vector& z) const override;
    bool is_linear() const override { return true; }
    bool is_symmetric() const override { return true; }
    index_t size() const override { return static_cast<index_t>(inv_diag_.size()); }
    std::string name() const override { return "jacobi"; }

private:
    Vector inv_diag_;
};

/// Zero-fill incomplete Cholesky on the lower-triangular sparsity of A.
/// apply() solves L L^T z = r with two triangular sweeps. Pivot breakdown
/// triggers diagonal-shift retries (1e-3 of the mean diagonal, doubling, at
/// most 5 attempts) before failing.
class Ic0Precond : public Preconditioner {
public:
    explicit Ic0Precond(const SparseMatrix& A);
    using Preconditioner::apply;
    void apply(const Vector& r, Vector& z) const override;
    bool is_linear() const override { return true; }
    bool is_symmetric() const override { return true; }
    index_t size() const override { return n_; }
    std::string name() const override { return "ic0"; }

    int shift_retries() const { return shift_retries_; }
    const SparseMatrix& factor() const { return L_; }

private:
    bool try_factorize(const SparseMatrix& A, double shift);

    index_t n_ = 0;
    SparseMatrix L_;  // lower triangular, CSR
    int shift_retries_ = 0;
};

std::unique_ptr<Preconditioner> identity_precond(index_t n);
std::unique_ptr<Preconditioner> jacobi_precond(const SparseMatrix& A);
std::unique_ptr<Preconditioner> ic0_precond(const SparseMatrix& A);

}  // namespace npsd
