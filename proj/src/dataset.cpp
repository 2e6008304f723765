#include "npsd/train/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "npsd/fluid.hpp"
#include "npsd/lanczos.hpp"
#include "npsd/rng.hpp"
#include "npsd/vector_ops.hpp"

namespace npsd {

RhsMode rhs_mode_from_string(const std::string& s) {
    if (s == "ritz") return RhsMode::ritz;
    if (s == "random") return RhsMode::random;
    if (s == "masked") return RhsMode::masked_eigenmodes;
    throw std::invalid_argument("unknown rhs mode '" + s + "' (ritz|random|masked)");
}

std::string to_string(RhsMode m) {
    switch (m) {
        case RhsMode::ritz: return "ritz";
        case RhsMode::random: return "random";
        case RhsMode::masked_eigenmodes: return "masked";
    }
    return "ritz";
}

std::vector<Vector> generate_rhs(const SparseMatrix& A, index_t n_ritz, index_t n_rhs,
                                 std::uint64_t seed) {
    require(n_ritz >= 1 && n_ritz <= A.n_rows, "generate_rhs: n_ritz out of range");
    std::vector<Vector> out;
    if (n_rhs == 0) return out;

    const LanczosResult lz = lanczos_ritz(A, n_ritz, derive_seed(seed, 0));
    if (lz.breakdown)
        std::cerr << "generate_rhs: Lanczos breakdown after " << lz.steps
                  << " steps; using the Ritz pairs obtained\n";
    const std::size_t k = lz.pairs.size();
    require(k > 0, "generate_rhs: no Ritz pairs available");

    Rng rng(derive_seed(seed, 1));
    out.reserve(static_cast<std::size_t>(n_rhs));
    const std::size_t n = static_cast<std::size_t>(A.n_rows);
    for (index_t s = 0; s < n_rhs; ++s) {
        Vector b(n, 0.0);
        for (std::size_t j = 0; j < k; ++j)
            axpy_inplace(rng.normal(), lz.pairs[j].vector, b);
        const double nb = norm2(b);
        if (nb > 0.0) scale_inplace(1.0 / nb, b);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<Vector> generate_rhs_random(index_t n, index_t n_rhs, std::uint64_t seed) {
    std::vector<Vector> out;
    Rng rng(seed);
    for (index_t s = 0; s < n_rhs; ++s) {
        Vector b(static_cast<std::size_t>(n));
        for (auto& v : b) v = rng.normal();
        const double nb = norm2(b);
        if (nb > 0.0) scale_inplace(1.0 / nb, b);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<Vector> generate_rhs_masked_modes(const IndicatorImage& I, const ReductionMap& map,
                                              index_t n_rhs, std::uint64_t seed) {
    std::vector<Vector> out;
    Rng rng(seed);
    const double pi = 3.14159265358979323846;
    for (index_t s = 0; s < n_rhs; ++s) {
        // random box eigenmode sin(pi kx (x+1/2)/nx) sin(pi ky (y+1/2)/ny)
        const index_t kx = rng.uniform_int(1, std::max<index_t>(1, I.nx - 1));
        const index_t ky = rng.uniform_int(1, std::max<index_t>(1, I.ny - 1));
        Vector b(static_cast<std::size_t>(map.reduced_size()));
        for (std::size_t r = 0; r < b.size(); ++r) {
            const index_t cell = map.fluid_indices[r];
            const index_t x = cell % I.nx;
            const index_t y = cell / I.nx;
            b[r] = std::sin(pi * static_cast<double>(kx) * (static_cast<double>(x) + 0.5) /
                            static_cast<double>(I.nx)) *
                   std::sin(pi * static_cast<double>(ky) * (static_cast<double>(y) + 0.5) /
                            static_cast<double>(I.ny));
        }
        const double nb = norm2(b);
        if (nb > 0.0)
            scale_inplace(1.0 / nb, b);
        else
            b.assign(b.size(), 1.0 / std::sqrt(static_cast<double>(b.size())));
        out.push_back(std::move(b));
    }
    return out;
}

void fill_entry_rhs(DatasetEntry& entry, RhsMode mode, index_t n_ritz, index_t n_rhs,
                    std::uint64_t entry_seed) {
    switch (mode) {
        case RhsMode::ritz: {
            const index_t k = std::min<index_t>(n_ritz, entry.A.n_rows);
            entry.rhs = generate_rhs(entry.A, k, n_rhs, entry_seed);
            break;
        }
        case RhsMode::random:
            entry.rhs = generate_rhs_random(entry.A.n_rows, n_rhs, entry_seed);
            break;
        case RhsMode::masked_eigenmodes:
            entry.rhs = generate_rhs_masked_modes(entry.I, entry.map, n_rhs, entry_seed);
            break;
    }
}

void save_dataset(const RhsDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["seed"] = ds.seed;
    manifest["n_ritz"] = ds.n_ritz;
    manifest["n_rhs"] = ds.n_rhs;
    manifest["mode"] = to_string(ds.mode);
    manifest["entries"] = nlohmann::json::array();
    char buf[128];
    for (const DatasetEntry& e : ds.entries) {
        std::snprintf(buf, sizeof buf, "%s_f%04d", e.scene_id.c_str(), e.frame_id);
        const std::string base(buf);
        save_scn(e.I, dir + "/" + base + ".scn");
        save_triplets(e.A, dir + "/" + base + ".mtx");
        std::FILE* f = std::fopen((dir + "/" + base + ".rhs.bin").c_str(), "wb");
        if (!f) throw std::runtime_error("save_dataset: cannot write rhs for " + base);
        for (const Vector& b : e.rhs) std::fwrite(b.data(), sizeof(double), b.size(), f);
        std::fclose(f);
        nlohmann::json row;
        row["scene_id"] = e.scene_id;
        row["frame_id"] = e.frame_id;
        row["scn"] = base + ".scn";
        row["mtx"] = base + ".mtx";
        row["rhs"] = base + ".rhs.bin";
        row["n_rhs"] = e.rhs.size();
        row["n_f"] = e.A.n_rows;
        manifest["entries"].push_back(row);
    }
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw std::runtime_error("save_dataset: cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

RhsDataset load_dataset(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw std::runtime_error("load_dataset: missing manifest.json in " + dir);
    nlohmann::json manifest;
    in >> manifest;

    RhsDataset ds;
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    ds.n_ritz = manifest.at("n_ritz").get<index_t>();
    ds.n_rhs = manifest.at("n_rhs").get<index_t>();
    ds.mode = rhs_mode_from_string(manifest.at("mode").get<std::string>());
    for (const auto& row : manifest.at("entries")) {
        DatasetEntry e;
        e.scene_id = row.at("scene_id").get<std::string>();
        e.frame_id = row.at("frame_id").get<int>();
        e.I = load_scn(dir + "/" + row.at("scn").get<std::string>());
        e.A = load_triplets(dir + "/" + row.at("mtx").get<std::string>());
        e.A.symmetric = true;
        e.map = ReductionMap::from_image(e.I);
        const Vector flat = load_raw_f64(dir + "/" + row.at("rhs").get<std::string>());
        const std::size_t n_rhs = row.at("n_rhs").get<std::size_t>();
        const std::size_t nf = static_cast<std::size_t>(e.A.n_rows);
        require(flat.size() == n_rhs * nf, "load_dataset: rhs block size mismatch for " +
                                               e.scene_id + " frame " + std::to_string(e.frame_id));
        for (std::size_t s = 0; s < n_rhs; ++s)
            e.rhs.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(s * nf),
                               flat.begin() + static_cast<std::ptrdiff_t>((s + 1) * nf));
        ds.entries.push_back(std::move(e));
    }
    return ds;
}

}  // namespace npsd
