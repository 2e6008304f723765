#pragma once

#include <cstdint>

#include "npsd/sparse.hpp"
#include "npsd/types.hpp"

namespace npsd {

/// Approximate eigenpair extracted from the Lanczos Krylov subspace.
struct RitzPair {
    double value = 0.0;
    Vector vector;  // unit 2-norm
};

struct LanczosResult {
    std::vector<RitzPair> pairs;  // sorted ascending by value
    bool breakdown = false;       // true if a zero beta cut the recurrence short
    index_t steps = 0;            // Lanczos steps actually taken
};

/// Runs k Lanczos steps with full reorthogonalization of the basis, starting
/// from a PRNG-drawn unit vector, and returns the k Ritz pairs. On breakdown
/// (beta ~ 0) the pairs computed so far are returned with the flag set.
/// Deterministic for a fixed seed. Throws if k > n_rows.
LanczosResult lanczos_ritz(const SparseMatrix& A, index_t k, std::uint64_t seed);

}  // namespace npsd
