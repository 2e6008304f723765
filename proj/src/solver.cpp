#include "npsd/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>

#include "npsd/vector_ops.hpp"

namespace npsd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double stop_threshold(double r0, const SolveConfig& cfg) {
    require(cfg.tol_reduction > 0.0 && cfg.tol_reduction < 1.0,
            "SolveConfig: tol_reduction must lie in (0,1)");
    double thr = cfg.tol_reduction * r0;
    if (cfg.tol_abs > 0.0) thr = std::max(thr, cfg.tol_abs);
    return thr;
}

void check_inputs(const SparseMatrix& A, const Vector& b, const Vector* x0) {
    require(A.n_rows == A.n_cols, "solve: matrix not square");
    require(static_cast<index_t>(b.size()) == A.n_rows, "solve: rhs length mismatch");
    require(all_finite(b), "solve: rhs has non-finite entries");
    if (x0) require(static_cast<index_t>(x0->size()) == A.n_rows, "solve: x0 length mismatch");
}

}  // namespace

SolveResult pcg_solve(const SparseMatrix& A, const Vector& b_in, const Preconditioner& P,
                      const SolveConfig& cfg, const Vector* x0) {
    check_inputs(A, b_in, x0);
    const auto t0 = Clock::now();

    SolveResult res;
    res.report.method = "pcg+" + P.name();
    Vector b = b_in;
    res.x = x0 ? *x0 : Vector(b.size(), 0.0);
    if (cfg.nullspace_projection) {
        mean_project(b);
        mean_project(res.x);
    }

    Vector r = b;
    Vector Ax = spmv(A, res.x);
    axpy_inplace(-1.0, Ax, r);
    if (cfg.nullspace_projection) mean_project(r);

    double rnorm = norm2(r);
    res.report.residual_history.push_back(rnorm);
    res.report.setup_seconds = seconds_since(t0);
    res.report.cumulative_seconds.push_back(res.report.setup_seconds);
    const double thr = stop_threshold(rnorm, cfg);
    if (rnorm <= thr) {
        res.report.converged = true;
        return res;
    }

    Vector z;
    {
        const auto tp = Clock::now();
        P.apply(r, z);
        res.report.precond_seconds += seconds_since(tp);
    }
    Vector p = z;
    double rz = dot(r, z);
    Vector Ap;

    for (index_t k = 1; k <= cfg.max_iters; ++k) {
        spmv(A, p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0) || std::abs(pAp) < 1e-300)
            throw SolverBreakdown("pcg: non-positive curvature p'Ap = " + std::to_string(pAp) +
                                  " at iteration " + std::to_string(k));
        const double alpha = rz / pAp;
        axpy_inplace(alpha, p, res.x);
        axpy_inplace(-alpha, Ap, r);
        if (cfg.nullspace_projection) mean_project(r);

        rnorm = norm2(r);
        res.report.iterations = k;
        res.report.residual_history.push_back(rnorm);
        res.report.cumulative_seconds.push_back(seconds_since(t0));
        if (rnorm <= thr) {
            res.report.converged = true;
            break;
        }

        const auto tp = Clock::now();
        P.apply(r, z);
        res.report.precond_seconds += seconds_since(tp);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
    }
    res.report.iterate_seconds = seconds_since(t0) - res.report.setup_seconds;
    return res;
}

SolveResult cg_solve(const SparseMatrix& A, const Vector& b, const SolveConfig& cfg,
                     const Vector* x0) {
    IdentityPrecond id(A.n_rows);
    SolveResult res = pcg_solve(A, b, id, cfg, x0);
    res.report.method = "cg";
    return res;
}

SolveResult flexible_pcg_solve(const SparseMatrix& A, const Vector& b_in, const Preconditioner& P,
                               const SolveConfig& cfg, const Vector* x0) {
    check_inputs(A, b_in, x0);
    const auto t0 = Clock::now();

    SolveResult res;
    res.report.method = "fpcg+" + P.name();
    Vector b = b_in;
    res.x = x0 ? *x0 : Vector(b.size(), 0.0);
    if (cfg.nullspace_projection) {
        mean_project(b);
        mean_project(res.x);
    }

    Vector r = b;
    Vector Ax = spmv(A, res.x);
    axpy_inplace(-1.0, Ax, r);
    if (cfg.nullspace_projection) mean_project(r);

    double rnorm = norm2(r);
    res.report.residual_history.push_back(rnorm);
    res.report.setup_seconds = seconds_since(t0);
    res.report.cumulative_seconds.push_back(res.report.setup_seconds);
    const double thr = stop_threshold(rnorm, cfg);
    if (rnorm <= thr) {
        res.report.converged = true;
        return res;
    }

    Vector z, z_prev, p, Ap;
    {
        const auto tp = Clock::now();
        P.apply(r, z);
        res.report.precond_seconds += seconds_since(tp);
    }
    p = z;
    double rz = dot(r, z);

    for (index_t k = 1; k <= cfg.max_iters; ++k) {
        spmv(A, p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0) || std::abs(pAp) < 1e-300)
            throw SolverBreakdown("fpcg: non-positive curvature p'Ap = " + std::to_string(pAp) +
                                  " at iteration " + std::to_string(k));
        const double alpha = rz / pAp;
        axpy_inplace(alpha, p, res.x);
        axpy_inplace(-alpha, Ap, r);
        if (cfg.nullspace_projection) mean_project(r);

        rnorm = norm2(r);
        res.report.iterations = k;
        res.report.residual_history.push_back(rnorm);
        res.report.cumulative_seconds.push_back(seconds_since(t0));
        if (rnorm <= thr) {
            res.report.converged = true;
            break;
        }

        z_prev = z;
        const auto tp = Clock::now();
        P.apply(r, z);
        res.report.precond_seconds += seconds_since(tp);
        // Polak-Ribiere form: beta = r_k'(z_k - z_{k-1}) / (r_{k-1}' z_{k-1})
        double num = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) num += r[i] * (z[i] - z_prev[i]);
        const double beta = num / rz;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
        rz = dot(r, z);
    }
    res.report.iterate_seconds = seconds_since(t0) - res.report.setup_seconds;
    return res;
}

SolveResult psdo_solve(const SparseMatrix& A, const Vector& b_in, const Preconditioner& P,
                       const SolveConfig& cfg, const Vector* x0) {
    check_inputs(A, b_in, x0);
    require(cfg.n_ortho >= 0, "psdo: n_ortho must be >= 0");
    const auto t0 = Clock::now();

    SolveResult res;
    res.report.method = "psdo+" + P.name();
    Vector b = b_in;
    res.x = x0 ? *x0 : Vector(b.size(), 0.0);
    if (cfg.nullspace_projection) {
        mean_project(b);
        mean_project(res.x);
    }

    Vector r = b;
    Vector Ax = spmv(A, res.x);
    axpy_inplace(-1.0, Ax, r);
    if (cfg.nullspace_projection) mean_project(r);

    double rnorm = norm2(r);
    res.report.residual_history.push_back(rnorm);
    res.report.setup_seconds = seconds_since(t0);
    res.report.cumulative_seconds.push_back(res.report.setup_seconds);
    const double thr = stop_threshold(rnorm, cfg);
    if (rnorm <= thr) {
        res.report.converged = true;
        return res;
    }

    struct CachedDirection {
        Vector d;
        Vector Ad;
        double dAd;
    };
    std::deque<CachedDirection> cache;  // last n_ortho directions

    Vector d, scaled, Ad;
    for (index_t k = 1; k <= cfg.max_iters; ++k) {
        // d_k = P(r / ||r||)
        const auto tp = Clock::now();
        if (cfg.normalize_before_precond) {
            scaled = r;
            scale_inplace(1.0 / rnorm, scaled);
            P.apply(scaled, d);
        } else {
            P.apply(r, d);
        }
        res.report.precond_seconds += seconds_since(tp);

        // A-orthogonalize against the cached directions, oldest first
        for (const CachedDirection& c : cache) {
            const double proj = dot(d, c.Ad) / c.dAd;
            axpy_inplace(-proj, c.d, d);
        }

        spmv(A, d, Ad);
        const double dAd = dot(d, Ad);
        if (!(dAd > 0.0) || std::abs(dAd) < 1e-300)
            throw SolverBreakdown("psdo: curvature d'Ad = " + std::to_string(dAd) +
                                  " at iteration " + std::to_string(k) +
                                  " (||r|| = " + std::to_string(rnorm) + ")");
        const double alpha = dot(r, d) / dAd;
        axpy_inplace(alpha, d, res.x);

        // explicit residual recompute
        spmv(A, res.x, Ax);
        r = b;
        axpy_inplace(-1.0, Ax, r);
        if (cfg.nullspace_projection) mean_project(r);

        rnorm = norm2(r);
        res.report.iterations = k;
        res.report.residual_history.push_back(rnorm);
        res.report.cumulative_seconds.push_back(seconds_since(t0));

        if (cfg.n_ortho > 0) {
            cache.push_back({d, Ad, dAd});
            if (static_cast<int>(cache.size()) > cfg.n_ortho) cache.pop_front();
        }
        if (rnorm <= thr) {
            res.report.converged = true;
            break;
        }
    }
    res.report.iterate_seconds = seconds_since(t0) - res.report.setup_seconds;
    return res;
}

SolveResult psd_solve(const SparseMatrix& A, const Vector& b, const Preconditioner& P,
                      const SolveConfig& cfg, const Vector* x0) {
    SolveConfig c = cfg;
    c.n_ortho = 0;
    SolveResult res = psdo_solve(A, b, P, c, x0);
    res.report.method = "psd+" + P.name();
    return res;
}

void write_history_csv(const SolveReport& report, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_history_csv: cannot open " + path);
    std::fprintf(f, "iter,residual_norm,cumulative_seconds\n");
    for (std::size_t i = 0; i < report.residual_history.size(); ++i)
        std::fprintf(f, "%zu,%.17g,%.9f\n", i, report.residual_history[i],
                     i < report.cumulative_seconds.size() ? report.cumulative_seconds[i] : 0.0);
    std::fclose(f);
}

}  // namespace npsd
