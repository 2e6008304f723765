#include "npsd/lanczos.hpp"

#include <algorithm>
#include <cmath>

#include "npsd/dense.hpp"
#include "npsd/rng.hpp"
#include "npsd/vector_ops.hpp"

namespace npsd {

Vector random_unit_vector(index_t n, std::uint64_t seed) {
    require(n > 0, "random_unit_vector: n must be positive");
    Rng rng(seed);
    Vector v(static_cast<std::size_t>(n));
    double nrm = 0.0;
    while (nrm == 0.0) {
        for (auto& x : v) x = rng.normal();
        nrm = norm2(v);
    }
    scale_inplace(1.0 / nrm, v);
    return v;
}

LanczosResult lanczos_ritz(const SparseMatrix& A, index_t k, std::uint64_t seed) {
    require(A.n_rows == A.n_cols, "lanczos_ritz: matrix not square");
    require(k >= 1, "lanczos_ritz: k must be >= 1");
    require(k <= A.n_rows, "lanczos_ritz: k exceeds matrix dimension");

    const index_t n = A.n_rows;
    LanczosResult res;

    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(k));
    basis.push_back(random_unit_vector(n, seed));

    std::vector<double> alpha, beta;
    Vector w(static_cast<std::size_t>(n));

    for (index_t j = 0; j < k; ++j) {
        spmv(A, basis[static_cast<std::size_t>(j)], w);
        const double a = dot(w, basis[static_cast<std::size_t>(j)]);
        alpha.push_back(a);
        axpy_inplace(-a, basis[static_cast<std::size_t>(j)], w);
        if (j > 0) axpy_inplace(-beta.back(), basis[static_cast<std::size_t>(j) - 1], w);

        // full reorthogonalization, two classical Gram-Schmidt passes
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& v : basis) axpy_inplace(-dot(w, v), v, w);

        if (j + 1 == k) break;

        const double b = norm2(w);
        const double scale = std::abs(a) + (beta.empty() ? 0.0 : beta.back()) + 1e-300;
        if (b <= 1e-13 * scale) {
            res.breakdown = true;
            break;
        }
        beta.push_back(b);
        scale_inplace(1.0 / b, w);
        basis.push_back(w);
    }

    const index_t steps = static_cast<index_t>(alpha.size());
    res.steps = steps;

    TridiagEigenResult eig = tridiag_eigen(alpha, beta);

    res.pairs.resize(static_cast<std::size_t>(steps));
    for (index_t p = 0; p < steps; ++p) {
        RitzPair& rp = res.pairs[static_cast<std::size_t>(p)];
        rp.value = eig.values[static_cast<std::size_t>(p)];
        rp.vector.assign(static_cast<std::size_t>(n), 0.0);
        const Vector& s = eig.vectors[static_cast<std::size_t>(p)];
        for (index_t j = 0; j < steps; ++j)
            axpy_inplace(s[static_cast<std::size_t>(j)], basis[static_cast<std::size_t>(j)], rp.vector);
        const double nrm = norm2(rp.vector);
        if (nrm > 0.0) scale_inplace(1.0 / nrm, rp.vector);
    }
    // tridiag_eigen already sorts ascending; keep the pairing intact
    return res;
}

}  // namespace npsd
