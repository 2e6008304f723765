#pragma once

#include <string>
#include <vector>

#include "npsd/discretization.hpp"
#include "npsd/scene.hpp"
#include "npsd/sparse.hpp"

namespace npsd {

/// Right-hand-side sampling strategy. "ritz" is the production path; the
/// cheaper alternatives exist so their degradation can be measured.
enum class RhsMode { ritz, random, masked_eigenmodes };

RhsMode rhs_mode_from_string(const std::string& s);
std::string to_string(RhsMode m);

/// One matrix with its geometry and unit-norm training right-hand sides.
struct DatasetEntry {
    std::string scene_id;
    int frame_id = 0;
    IndicatorImage I;
    SparseMatrix A;  // reduced, n_f x n_f
    ReductionMap map;
    std::vector<Vector> rhs;
};

struct RhsDataset {
    std::vector<DatasetEntry> entries;
    std::uint64_t seed = 0;
    index_t n_ritz = 0;
    index_t n_rhs = 0;
    RhsMode mode = RhsMode::ritz;
};

/// Ritz-span sampling: k Ritz pairs via Lanczos, then unit-normalized random
/// linear combinations with i.i.d. standard-normal coefficients. On Lanczos
/// breakdown the pairs obtained so far are used (with a warning to stderr).
std::vector<Vector> generate_rhs(const SparseMatrix& A, index_t n_ritz, index_t n_rhs,
                                 std::uint64_t seed);

/// Rejected alternative: i.i.d. normal vectors, normalized.
std::vector<Vector> generate_rhs_random(index_t n, index_t n_rhs, std::uint64_t seed);

/// Rejected alternative: analytical Laplacian eigenmodes on the full box,
/// masked to fluid cells and normalized.
std::vector<Vector> generate_rhs_masked_modes(const IndicatorImage& I, const ReductionMap& map,
                                              index_t n_rhs, std::uint64_t seed);

/// Fills entry.rhs according to the mode, with a per-entry derived seed.
void fill_entry_rhs(DatasetEntry& entry, RhsMode mode, index_t n_ritz, index_t n_rhs,
                    std::uint64_t entry_seed);

/// Directory layout: manifest.json plus per-entry .scn/.mtx and a raw f64
/// little-endian block of n_rhs concatenated vectors.
void save_dataset(const RhsDataset& ds, const std::string& dir);
RhsDataset load_dataset(const std::string& dir);

}  // namespace npsd
