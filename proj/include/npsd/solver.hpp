#pragma once

#include <string>

#include "npsd/precond.hpp"
#include "npsd/sparse.hpp"
#include "npsd/types.hpp"

namespace npsd {

struct SolveConfig {
    /// Relative stop: iterate until ||r_k|| <= tol_reduction * ||r_0||.
    double tol_reduction = 1e-6;
    /// Optional absolute stop, active when > 0: ||r_k|| <= tol_abs.
    double tol_abs = 0.0;
    index_t max_iters = 1000;
    /// Number of previous directions each new PSDO direction is
    /// A-orthogonalized against (0 reduces PSDO to PSD).
    int n_ortho = 2;
    /// Project b and every residual onto the complement of the constant
    /// vector (singular pure-Neumann systems).
    bool nullspace_projection = false;
    /// Feed the preconditioner r/||r|| instead of r (PSDO only). For a
    /// linear preconditioner the iterates are unchanged.
    bool normalize_before_precond = true;
};

struct SolveReport {
    index_t iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // ||r_0|| ... ||r_k||, length iterations+1
    std::vector<double> cumulative_seconds;  // wall clock at each history entry
    double setup_seconds = 0.0;
    double iterate_seconds = 0.0;
    double precond_seconds = 0.0;
    std::string method;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

/// Unpreconditioned CG (PCG specialized to the identity operator; the
/// iterate sequence is bitwise identical to pcg_solve with IdentityPrecond).
SolveResult cg_solve(const SparseMatrix& A, const Vector& b, const SolveConfig& cfg,
                     const Vector* x0 = nullptr);

/// Standard PCG with the preconditioned-residual recurrence.
SolveResult pcg_solve(const SparseMatrix& A, const Vector& b, const Preconditioner& P,
                      const SolveConfig& cfg, const Vector* x0 = nullptr);

/// Flexible PCG: Polak-Ribiere-style beta_k = r_k'(z_k - z_{k-1}) /
/// (r_{k-1}' z_{k-1}), tolerant of nonsymmetric preconditioners.
SolveResult flexible_pcg_solve(const SparseMatrix& A, const Vector& b, const Preconditioner& P,
                               const SolveConfig& cfg, const Vector* x0 = nullptr);

/// Preconditioned steepest descent with A-orthogonalization: each step
/// preconditions the normalized residual, A-orthogonalizes it against the
/// last n_ortho cached directions, takes an exact line-search step, and
/// recomputes the residual explicitly as b - A x_k. One spmv for A d_k plus
/// one for the recompute per iteration. Throws SolverBreakdown when the
/// curvature d'A d is non-positive or underflows.
SolveResult psdo_solve(const SparseMatrix& A, const Vector& b, const Preconditioner& P,
                       const SolveConfig& cfg, const Vector* x0 = nullptr);

/// PSDO with n_ortho forced to 0.
SolveResult psd_solve(const SparseMatrix& A, const Vector& b, const Preconditioner& P,
                      const SolveConfig& cfg, const Vector* x0 = nullptr);

/// Residual history as CSV: iter,residual_norm,cumulative_seconds.
void write_history_csv(const SolveReport& report, const std::string& path);

}  // namespace npsd
