#include <doctest.h>

#include <cmath>

#include "npsd/dense.hpp"
#include "npsd/lanczos.hpp"
#include "npsd/scene.hpp"
#include "npsd/discretization.hpp"
#include "npsd/sparse.hpp"
#include "npsd/vector_ops.hpp"
#include "oracles.hpp"

using namespace npsd;

namespace {
SparseMatrix laplacian_1d(index_t n) {
    std::vector<index_t> is, js;
    std::vector<double> vs;
    for (index_t i = 0; i < n; ++i) {
        is.push_back(i);
        js.push_back(i);
        vs.push_back(2.0);
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

IndicatorImage mixed_bc_image(index_t nx, index_t ny) {
    // air strip on top, solid block in a corner, fluid elsewhere
    SceneSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0,
                          static_cast<double>(ny) * 0.75, 0.0});
    spec.prims.push_back({Primitive::Shape::box, CellType::solid, 0.0, 0.0,
                          static_cast<double>(nx) * 0.25, static_cast<double>(ny) * 0.25});
    return rasterize(spec);
}
}  // namespace

TEST_CASE("vector ops basics") {
    CHECK(dot({1, 0}, {0, 1}) == 0.0);
    CHECK(norm2({3, 4}) == doctest::Approx(5.0).epsilon(1e-15));
    const Vector r = axpy(2.0, {1, 1}, {0, 1});
    CHECK(r[0] == 2.0);
    CHECK(r[1] == 3.0);
    CHECK_THROWS_AS(dot({1, 2}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(axpy(1.0, {1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("spmv identity and stencil") {
    const auto I3 = SparseMatrix::identity(3);
    const Vector y = spmv(I3, {1, 2, 3});
    CHECK(y == Vector{1, 2, 3});

    const auto T = laplacian_1d(3);
    const Vector z = spmv(T, {1, 1, 1});
    CHECK(z == Vector{1, 0, 1});

    CHECK_THROWS_AS(spmv(T, Vector{1, 2}), std::invalid_argument);
}

TEST_CASE("spmv matches dense oracle on random matrices") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto A = oracle::random_sparse(20, 20, 0.3, 100 + seed);
        A.validate();
        Rng rng(seed);
        Vector x(20);
        for (auto& v : x) v = rng.normal();
        const Vector y = spmv(A, x);
        const Vector yd = oracle::dense_matvec(oracle::to_dense(A), 20, 20, x);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::abs(y[i] - yd[i]) < 1e-13);
    }
}

TEST_CASE("spmv omp path matches serial reference bitwise") {
    const auto A = oracle::random_sparse(300, 300, 0.05, 7);
    Rng rng(3);
    Vector x(300);
    for (auto& v : x) v = rng.normal();
    Vector y_omp, y_ref;
    spmv(A, x, y_omp);
    ref::spmv_serial(A, x, y_ref);
    CHECK(y_omp == y_ref);
}

TEST_CASE("triplet text round trip") {
    const auto A = oracle::random_sparse(12, 9, 0.4, 42);
    save_triplets(A, "triplet_test.txt");
    const auto B = load_triplets("triplet_test.txt");
    CHECK(B.n_rows == A.n_rows);
    CHECK(B.n_cols == A.n_cols);
    CHECK(B.row_offsets == A.row_offsets);
    CHECK(B.col_indices == A.col_indices);
    CHECK(B.values == A.values);
}

TEST_CASE("dense cholesky closed forms") {
    DenseMatrix A(2, 2);
    A.at(0, 0) = 4;
    A.at(0, 1) = 2;
    A.at(1, 0) = 2;
    A.at(1, 1) = 3;
    const auto res = dense_cholesky(A);
    REQUIRE(res.spd);
    CHECK(res.L.at(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(res.L.at(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.L.at(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    DenseMatrix I5(5, 5);
    for (index_t i = 0; i < 5; ++i) I5.at(i, i) = 1.0;
    const auto res5 = dense_cholesky(I5);
    REQUIRE(res5.spd);
    for (index_t i = 0; i < 5; ++i)
        for (index_t j = 0; j < 5; ++j) CHECK(res5.L.at(i, j) == (i == j ? 1.0 : 0.0));

    DenseMatrix N(2, 2);
    N.at(0, 0) = 1;
    N.at(0, 1) = 2;
    N.at(1, 0) = 2;
    N.at(1, 1) = 1;  // indefinite
    CHECK_FALSE(dense_cholesky(N).spd);
    CHECK(dense_cholesky(N).failed_pivot == 1);
}

TEST_CASE("dense cholesky accepts an assembled mixed-BC Poisson matrix") {
    const auto I = mixed_bc_image(8, 8);
    const auto A_full = assemble_poisson(I);
    const Vector b(static_cast<std::size_t>(A_full.n_rows), 0.0);
    const auto sys = reduce(A_full, b, I);
    const auto res = dense_cholesky(DenseMatrix::from_sparse(sys.A));
    CHECK(res.spd);
    // LL^T reproduces A within 1e-10 relative
    const index_t n = sys.A.n_rows;
    const auto D = oracle::to_dense(sys.A);
    double max_rel = 0.0;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) {
            double llt = 0.0;
            for (index_t k = 0; k <= std::min(i, j); ++k) llt += res.L.at(i, k) * res.L.at(j, k);
            const double a = D[static_cast<std::size_t>(i * n + j)];
            max_rel = std::max(max_rel, std::abs(llt - a) / 4.0);
        }
    CHECK(max_rel < 1e-10);
}

TEST_CASE("tridiag eigensolver matches dense oracle") {
    const index_t n = 24;
    Rng rng(9);
    std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n) - 1);
    for (auto& v : d) v = rng.uniform(0.5, 3.0);
    for (auto& v : e) v = rng.uniform(-1.0, 1.0);

    std::vector<index_t> is, js;
    std::vector<double> vs;
    for (index_t i = 0; i < n; ++i) {
        is.push_back(i);
        js.push_back(i);
        vs.push_back(d[static_cast<std::size_t>(i)]);
        if (i + 1 < n) {
            is.push_back(i);
            js.push_back(i + 1);
            vs.push_back(e[static_cast<std::size_t>(i)]);
            is.push_back(i + 1);
            js.push_back(i);
            vs.push_back(e[static_cast<std::size_t>(i)]);
        }
    }
    const auto T = SparseMatrix::from_triplets(n, n, is, js, vs);
    const auto want = oracle::dense_symmetric_eigen(T);
    const auto got = tridiag_eigen(d, e);
    for (index_t i = 0; i < n; ++i) {
        CHECK(got.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(want.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
        // eigenvector check: T v = lambda v
        const Vector Tv = spmv(T, got.vectors[static_cast<std::size_t>(i)]);
        for (index_t r = 0; r < n; ++r)
            CHECK(std::abs(Tv[static_cast<std::size_t>(r)] -
                           got.values[static_cast<std::size_t>(i)] *
                               got.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)]) <
                  1e-9);
    }
}

TEST_CASE("lanczos on diag(1,5)") {
    auto A = SparseMatrix::from_triplets(2, 2, {0, 1}, {0, 1}, {1.0, 5.0});
    A.symmetric = true;
    const auto res = lanczos_ritz(A, 2, 1);
    REQUIRE(res.pairs.size() == 2);
    CHECK_FALSE(res.breakdown);
    CHECK(res.pairs[0].value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.pairs[1].value == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("lanczos full-subspace run matches dense eigensolver") {
    const auto A = laplacian_1d(32);
    const auto res = lanczos_ritz(A, 32, 7);
    REQUIRE(res.pairs.size() == 32);
    const auto want = oracle::dense_symmetric_eigen(A);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(std::abs(res.pairs[i].value - want.values[i]) <=
              1e-8 * std::max(1.0, std::abs(want.values[i])));
}

TEST_CASE("lanczos ritz pairs on a 2D Poisson matrix") {
    const auto I = mixed_bc_image(16, 16);
    const auto A_full = assemble_poisson(I);
    const Vector b(static_cast<std::size_t>(A_full.n_rows), 0.0);
    auto sys = reduce(A_full, b, I);
    sys.A.symmetric = true;

    // extreme-pair residuals only drop below 1e-6*frob once the Krylov space
    // is large enough; k=80 gives orders of margin on this spectrum
    const auto res = lanczos_ritz(sys.A, 80, 11);
    REQUIRE(res.pairs.size() == 80);

    double frob = 0.0;
    for (double v : sys.A.values) frob += v * v;
    frob = std::sqrt(frob);

    // extreme Ritz pairs satisfy the residual bound
    for (const auto idx : {std::size_t{0}, res.pairs.size() - 1}) {
        const auto& p = res.pairs[idx];
        Vector Av = spmv(sys.A, p.vector);
        axpy_inplace(-p.value, p.vector, Av);
        CHECK(norm2(Av) <= 1e-6 * frob);
    }

    // unit norm, pairwise orthonormal, strictly positive values for SPD input
    for (const auto& p : res.pairs) {
        CHECK(std::abs(norm2(p.vector) - 1.0) <= 1e-12);
        CHECK(p.value > 0.0);
    }
    for (std::size_t i = 0; i < res.pairs.size(); i += 7)
        for (std::size_t j = i + 1; j < res.pairs.size(); j += 5)
            CHECK(std::abs(dot(res.pairs[i].vector, res.pairs[j].vector)) < 1e-8);
}

TEST_CASE("lanczos is deterministic and validates k") {
    const auto A = laplacian_1d(16);
    const auto a = lanczos_ritz(A, 8, 123);
    const auto b = lanczos_ritz(A, 8, 123);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].value == b.pairs[i].value);
        CHECK(a.pairs[i].vector == b.pairs[i].vector);
    }
    CHECK_THROWS_AS(lanczos_ritz(A, 17, 0), std::invalid_argument);
}
