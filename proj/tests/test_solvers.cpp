#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "npsd/dense.hpp"
#include "npsd/discretization.hpp"
#include "npsd/rng.hpp"
#include "npsd/scene.hpp"
#include "npsd/solver.hpp"
#include "npsd/vector_ops.hpp"
#include "oracles.hpp"

using namespace npsd;

namespace {
ReducedSystem mixed_bc_system(index_t n) {
    SceneSpec spec;
    spec.nx = n;
    spec.ny = n;
    spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0,
                          static_cast<double>(n) * 0.75, 0.0});
    spec.prims.push_back({Primitive::Shape::box, CellType::solid, 0.0, 0.0,
                          static_cast<double>(n) * 0.3, static_cast<double>(n) * 0.2});
    const auto I = rasterize(spec);
    const auto A = assemble_poisson(I);
    return reduce(A, Vector(static_cast<std::size_t>(A.n_rows), 0.0), I);
}

Vector random_rhs(index_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vector b(static_cast<std::size_t>(n));
    for (auto& v : b) v = rng.normal();
    return b;
}

SparseMatrix well_conditioned_spd(index_t n) {
    std::vector<index_t> is, js;
    std::vector<double> vs;
    for (index_t i = 0; i < n; ++i) {
        is.push_back(i);
        js.push_back(i);
        vs.push_back(4.0);
        if (i + 1 < n) {
            is.push_back(i);
            js.push_back(i + 1);
            vs.push_back(-1.0);
            is.push_back(i + 1);
            js.push_back(i);
            vs.push_back(-1.0);
        }
    }
    auto A = SparseMatrix::from_triplets(n, n, is, js, vs);
    A.symmetric = true;
    return A;
}
}  // namespace

TEST_CASE("cg on the identity converges in one iteration") {
    const auto I = SparseMatrix::identity(5);
    const Vector b = random_rhs(5, 1);
    SolveConfig cfg;
    const auto res = cg_solve(I, b, cfg);
    CHECK(res.report.converged);
    CHECK(res.report.iterations == 1);
    for (std::size_t i = 0; i < 5; ++i) CHECK(res.x[i] == doctest::Approx(b[i]).epsilon(1e-14));
    CHECK(res.report.residual_history.size() == static_cast<std::size_t>(res.report.iterations) + 1);
}

TEST_CASE("cg finite termination on an 8x8 SPD system") {
    const auto A = oracle::random_spd(8, 0.4, 3);
    const Vector b = random_rhs(8, 4);
    SolveConfig cfg;
    cfg.tol_reduction = 1e-15;
    cfg.max_iters = 8;
    const auto res = cg_solve(A, b, cfg);
    const Vector r = axpy(-1.0, spmv(A, res.x), b);
    CHECK(norm2(r) < 1e-10 * norm2(b));
}

TEST_CASE("cg iteration count matches the textbook oracle within one") {
    const auto sys = mixed_bc_system(16);
    const Vector b = random_rhs(sys.A.n_rows, 5);
    SolveConfig cfg;
    cfg.tol_reduction = 1e-6;
    cfg.max_iters = 5000;
    const auto mine = cg_solve(sys.A, b, cfg);
    const auto orc = oracle::textbook_cg(sys.A, b, 1e-6, 5000);
    REQUIRE(mine.report.converged);
    REQUIRE(orc.converged);
    CHECK(std::abs(static_cast<double>(mine.report.iterations) -
                   static_cast<double>(orc.iterations)) <= 1.0);
}

TEST_CASE("pcg with identity is bitwise cg") {
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 6);
    SolveConfig cfg;
    cfg.max_iters = 500;
    const auto a = cg_solve(sys.A, b, cfg);
    IdentityPrecond P(sys.A.n_rows);
    const auto p = pcg_solve(sys.A, b, P, cfg);
    CHECK(a.x == p.x);
    CHECK(a.report.residual_history == p.report.residual_history);
}

TEST_CASE("pcg with the exact inverse converges in one iteration") {
    const auto A = oracle::random_spd(10, 0.4, 9);
    const auto chol = dense_cholesky(DenseMatrix::from_sparse(A));
    REQUIRE(chol.spd);

    struct ExactInverse : Preconditioner {
        const DenseMatrix& L;
        explicit ExactInverse(const DenseMatrix& L_) : L(L_) {}
        void apply(const Vector& r, Vector& z) const override { z = cholesky_solve(L, r); }
        bool is_linear() const override { return true; }
        bool is_symmetric() const override { return true; }
        index_t size() const override { return L.n_rows; }
        std::string name() const override { return "exact"; }
    } P(chol.L);

    const Vector b = random_rhs(10, 10);
    SolveConfig cfg;
    const auto res = pcg_solve(A, b, P, cfg);
    CHECK(res.report.converged);
    CHECK(res.report.iterations == 1);
}

TEST_CASE("flexible pcg reduces to cg with the identity") {
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 11);
    SolveConfig cfg;
    cfg.max_iters = 500;
    const auto a = cg_solve(sys.A, b, cfg);
    IdentityPrecond P(sys.A.n_rows);
    const auto f = flexible_pcg_solve(sys.A, b, P, cfg);
    REQUIRE(a.report.converged);
    REQUIRE(f.report.converged);
    const std::size_t n = std::min(a.report.residual_history.size(), f.report.residual_history.size());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(a.report.residual_history[i] - f.report.residual_history[i]) <=
              1e-10 * a.report.residual_history[i]);
}

TEST_CASE("flexible pcg matches pcg for a fixed SPD preconditioner") {
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 12);
    Ic0Precond P(sys.A);
    SolveConfig cfg;
    cfg.max_iters = 500;
    const auto p = pcg_solve(sys.A, b, P, cfg);
    const auto f = flexible_pcg_solve(sys.A, b, P, cfg);
    REQUIRE(p.report.converged);
    REQUIRE(f.report.converged);
    const std::size_t n = std::min(p.report.residual_history.size(), f.report.residual_history.size());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(p.report.residual_history[i] - f.report.residual_history[i]) <=
              1e-8 * std::max(1e-300, p.report.residual_history[i]));
}

TEST_CASE("psdo with identity and n_ortho=1 tracks cg") {
    const auto sys = mixed_bc_system(16);
    const Vector b = random_rhs(sys.A.n_rows, 13);
    SolveConfig cfg;
    cfg.max_iters = 30;
    cfg.tol_reduction = 1e-300;  // run all 30 iterations
    cfg.n_ortho = 1;
    const auto c = cg_solve(sys.A, b, cfg);
    IdentityPrecond P(sys.A.n_rows);
    const auto s = psdo_solve(sys.A, b, P, cfg);
    REQUIRE(c.report.residual_history.size() == s.report.residual_history.size());
    for (std::size_t i = 0; i < c.report.residual_history.size(); ++i)
        CHECK(std::abs(c.report.residual_history[i] - s.report.residual_history[i]) <=
              1e-8 * c.report.residual_history[i]);
}

TEST_CASE("psd (n_ortho=0) matches the steepest descent oracle") {
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 14);
    SolveConfig cfg;
    cfg.max_iters = 25;
    cfg.tol_reduction = 1e-300;
    IdentityPrecond P(sys.A.n_rows);
    const auto s = psd_solve(sys.A, b, P, cfg);
    const auto want = oracle::steepest_descent_history(sys.A, b, 25);
    REQUIRE(s.report.residual_history.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(std::abs(s.report.residual_history[i] - want[i]) <= 1e-9 * want[i]);
}

TEST_CASE("psdo error decreases monotonically in the A-norm") {
    const auto A = oracle::random_spd(8, 0.5, 15);
    const Vector b = random_rhs(8, 16);
    const auto chol = dense_cholesky(DenseMatrix::from_sparse(A));
    REQUIRE(chol.spd);
    const Vector xstar = cholesky_solve(chol.L, b);

    struct ScaledJacobi : Preconditioner {  // nonsymmetric-ish harmless linear map
        index_t n;
        explicit ScaledJacobi(index_t n_) : n(n_) {}
        void apply(const Vector& r, Vector& z) const override {
            z.resize(r.size());
            for (std::size_t i = 0; i < r.size(); ++i)
                z[i] = r[i] / (2.0 + 0.1 * static_cast<double>(i % 3));
        }
        bool is_linear() const override { return true; }
        bool is_symmetric() const override { return false; }
        index_t size() const override { return n; }
        std::string name() const override { return "scaled"; }
    } P(8);

    SolveConfig cfg;
    cfg.max_iters = 40;
    cfg.tol_reduction = 1e-300;
    cfg.n_ortho = 2;

    // track the A-norm of the error across iterations by re-running with
    // increasing iteration caps (the solver state is deterministic)
    double prev = std::numeric_limits<double>::infinity();
    for (index_t iters = 1; iters <= 12; ++iters) {
        SolveConfig c2 = cfg;
        c2.max_iters = iters;
        const auto res = psdo_solve(A, b, P, c2);
        Vector e = res.x;
        axpy_inplace(-1.0, xstar, e);
        const double enorm = std::sqrt(dot(e, spmv(A, e)));
        CHECK(enorm <= prev * (1.0 + 1e-12));
        prev = enorm;
    }
}

TEST_CASE("consecutive psdo directions are A-orthogonal") {
    // instrumented via the curvature identity: with n_ortho >= 1 the solver
    // subtracts the projection, so reconstruct d_k'A d_{k-1} from the cache
    // by running PSD and PSDO and comparing convergence instead is weaker;
    // here we directly check the invariant on a small dense reconstruction.
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 18);
    IdentityPrecond P(sys.A.n_rows);

    // reimplement one PSDO sweep recording directions
    SolveConfig cfg;
    cfg.n_ortho = 1;
    Vector x(b.size(), 0.0), r = b;
    Vector d_prev, Ad_prev;
    double dAd_prev = 0.0;
    for (int k = 0; k < 10; ++k) {
        Vector d = r;
        scale_inplace(1.0 / norm2(r), d);
        d = P.apply(d);
        if (k > 0) {
            const double proj = dot(d, Ad_prev) / dAd_prev;
            axpy_inplace(-proj, d_prev, d);
            const Vector Ad = spmv(sys.A, d);
            const double lhs = std::abs(dot(d, Ad_prev));
            const double bound = 1e-8 * std::sqrt(dot(d, Ad)) * std::sqrt(dAd_prev);
            CHECK(lhs <= bound);
        }
        const Vector Ad = spmv(sys.A, d);
        const double dAd = dot(d, Ad);
        const double alpha = dot(r, d) / dAd;
        axpy_inplace(alpha, d, x);
        const Vector Ax = spmv(sys.A, x);
        r = axpy(-1.0, Ax, b);
        d_prev = d;
        Ad_prev = Ad;
        dAd_prev = dAd;
    }
}

TEST_CASE("all five solvers agree on a well-conditioned system") {
    const auto A = well_conditioned_spd(8);
    const Vector b = random_rhs(8, 19);
    SolveConfig cfg;
    cfg.tol_reduction = 1e-12;
    cfg.max_iters = 5000;
    IdentityPrecond P(8);

    const auto x1 = cg_solve(A, b, cfg).x;
    const auto x2 = pcg_solve(A, b, P, cfg).x;
    const auto x3 = flexible_pcg_solve(A, b, P, cfg).x;
    const auto x4 = psd_solve(A, b, P, cfg).x;
    const auto x5 = psdo_solve(A, b, P, cfg).x;
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(std::abs(x1[i] - x2[i]) < 1e-8);
        CHECK(std::abs(x1[i] - x3[i]) < 1e-8);
        CHECK(std::abs(x1[i] - x4[i]) < 1e-8);
        CHECK(std::abs(x1[i] - x5[i]) < 1e-8);
    }
}

TEST_CASE("psdo iterates are invariant to residual normalization for linear P") {
    const auto sys = mixed_bc_system(8);
    const Vector b = random_rhs(sys.A.n_rows, 20);
    Ic0Precond P(sys.A);
    SolveConfig cfg;
    cfg.max_iters = 15;
    cfg.tol_reduction = 1e-300;
    SolveConfig cfg_raw = cfg;
    cfg_raw.normalize_before_precond = false;
    const auto a = psdo_solve(sys.A, b, P, cfg);
    const auto c = psdo_solve(sys.A, b, P, cfg_raw);
    for (std::size_t i = 0; i < a.x.size(); ++i)
        CHECK(std::abs(a.x[i] - c.x[i]) <= 1e-9 * (std::abs(a.x[i]) + 1e-12));
}

TEST_CASE("singular pure-Neumann system solves under mean projection") {
    IndicatorImage box(8, 8, CellType::fluid);
    const auto A_full = assemble_poisson(box);
    auto sys = reduce(A_full, Vector(64, 0.0), box);
    Vector b = random_rhs(64, 21);
    mean_project(b);  // compatible rhs
    SolveConfig cfg;
    cfg.nullspace_projection = true;
    cfg.max_iters = 2000;
    const auto res = cg_solve(sys.A, b, cfg);
    CHECK(res.report.converged);
    const Vector r = axpy(-1.0, spmv(sys.A, res.x), b);
    CHECK(norm2(r) <= 1e-6 * norm2(b) * 1.01);
}

TEST_CASE("max_iters exhaustion reports converged=false with history") {
    const auto sys = mixed_bc_system(16);
    const Vector b = random_rhs(sys.A.n_rows, 22);
    SolveConfig cfg;
    cfg.max_iters = 3;
    const auto res = cg_solve(sys.A, b, cfg);
    CHECK_FALSE(res.report.converged);
    CHECK(res.report.iterations == 3);
    CHECK(res.report.residual_history.size() == 4);
}

TEST_CASE("history csv export") {
    const auto A = well_conditioned_spd(6);
    const Vector b = random_rhs(6, 23);
    SolveConfig cfg;
    const auto res = cg_solve(A, b, cfg);
    write_history_csv(res.report, "history_test.csv");
    std::FILE* f = std::fopen("history_test.csv", "r");
    REQUIRE(f);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f));
    CHECK(std::string(line) == "iter,residual_norm,cumulative_seconds\n");
    int rows = 0;
    while (std::fgets(line, sizeof line, f)) ++rows;
    std::fclose(f);
    CHECK(rows == static_cast<int>(res.report.residual_history.size()));
    std::remove("history_test.csv");
}
