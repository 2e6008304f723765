#include "npsd/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "npsd/vector_ops.hpp"

namespace npsd {

namespace {

// clamped bilinear sample of a node field at grid coordinates (gx, gy)
double bilinear(const Field2D<double>& F, double gx, double gy) {
    gx = std::clamp(gx, 0.0, static_cast<double>(F.nx - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(F.ny - 1));
    index_t i0 = std::min(static_cast<index_t>(gx), F.nx - 2 >= 0 ? F.nx - 2 : index_t{0});
    index_t j0 = std::min(static_cast<index_t>(gy), F.ny - 2 >= 0 ? F.ny - 2 : index_t{0});
    i0 = std::max<index_t>(i0, 0);
    j0 = std::max<index_t>(j0, 0);
    const index_t i1 = std::min(i0 + 1, F.nx - 1);
    const index_t j1 = std::min(j0 + 1, F.ny - 1);
    const double fx = gx - static_cast<double>(i0);
    const double fy = gy - static_cast<double>(j0);
    const double a = (1.0 - fx) * F.at(i0, j0) + fx * F.at(i1, j0);
    const double b = (1.0 - fx) * F.at(i0, j1) + fx * F.at(i1, j1);
    return (1.0 - fy) * a + fy * b;
}

// velocity components sampled at an arbitrary point in cell units
double sample_u(const MacVelocity& vel, double x, double y) { return bilinear(vel.u, x, y - 0.5); }
double sample_v(const MacVelocity& vel, double x, double y) { return bilinear(vel.v, x - 0.5, y); }

}  // namespace

MacVelocity advect(const FluidState& state) {
    const MacVelocity& vel = state.vel;
    MacVelocity out = vel;
    const double step = vel.dt / vel.h;  // displacement in cell units per unit velocity

    for (index_t j = 0; j < vel.u.ny; ++j)
        for (index_t i = 0; i < vel.u.nx; ++i) {
            const double px = static_cast<double>(i);
            const double py = static_cast<double>(j) + 0.5;
            const double ux = vel.u.at(i, j);
            const double uy = sample_v(vel, px, py);
            out.u.at(i, j) = sample_u(vel, px - step * ux, py - step * uy) +
                             vel.dt * state.force_x / vel.rho;
        }
    for (index_t j = 0; j < vel.v.ny; ++j)
        for (index_t i = 0; i < vel.v.nx; ++i) {
            const double px = static_cast<double>(i) + 0.5;
            const double py = static_cast<double>(j);
            const double ux = sample_u(vel, px, py);
            const double uy = vel.v.at(i, j);
            out.v.at(i, j) = sample_v(vel, px - step * ux, py - step * uy) +
                             vel.dt * state.force_y / vel.rho;
        }
    return out;
}

ProjectionOutput project(const FluidState& state, const MacVelocity& u_star,
                         const ProjectConfig& cfg) {
    const IndicatorImage& I = state.I;
    require(u_star.nx == I.nx && u_star.ny == I.ny, "project: velocity/image shape mismatch");

    ProjectionOutput out;
    out.vel = u_star;

    const SparseMatrix A_full = assemble_poisson(I);
    const Vector b_full = mac_divergence_rhs(u_star, I, nullptr);
    ReducedSystem sys = reduce(A_full, b_full, I);

    SolveConfig scfg;
    scfg.tol_reduction = cfg.tol_reduction;
    scfg.max_iters = cfg.max_iters > 0 ? cfg.max_iters : 10 * sys.map.reduced_size();
    scfg.nullspace_projection = is_pure_neumann(I);

    SolveResult sol;
    bool solved = false;
    if (cfg.use_ic0 && sys.empty_rows == 0) {
        try {
            Ic0Precond ic(sys.A);
            sol = pcg_solve(sys.A, sys.b, ic, scfg);
            solved = true;
        } catch (const std::runtime_error&) {
            solved = false;  // factorization or iteration failed; retry with CG
        }
    }
    if (!solved) sol = cg_solve(sys.A, sys.b, scfg);
    if (!sol.report.converged)
        throw std::runtime_error(
            "project: pressure solve did not converge (" + std::to_string(sol.report.iterations) +
            " iterations, residual " +
            std::to_string(sol.report.residual_history.back()) + ")");

    out.pressure_full = pad_vector(sol.x, sys.map);
    out.report = sol.report;

    // gradient correction on faces adjacent to fluid; Neumann faces keep the
    // prescribed (zero) normal velocity
    const double scale = u_star.dt / (u_star.rho * u_star.h);
    const Vector& p = out.pressure_full;
    auto pat = [&](index_t x, index_t y) { return p[static_cast<std::size_t>(y * I.nx + x)]; };

    for (index_t j = 0; j < I.ny; ++j)
        for (index_t i = 0; i <= I.nx; ++i) {
            const CellType L = cell_type_clamped(I, i - 1, j);
            const CellType R = cell_type_clamped(I, i, j);
            if (L != CellType::fluid && R != CellType::fluid) continue;
            if (L == CellType::solid || R == CellType::solid) {
                out.vel.u.at(i, j) = 0.0;
            } else {
                const double pl = (L == CellType::fluid) ? pat(i - 1, j) : 0.0;
                const double pr = (R == CellType::fluid) ? pat(i, j) : 0.0;
                out.vel.u.at(i, j) -= scale * (pr - pl);
            }
        }
    for (index_t j = 0; j <= I.ny; ++j)
        for (index_t i = 0; i < I.nx; ++i) {
            const CellType B = cell_type_clamped(I, i, j - 1);
            const CellType T = cell_type_clamped(I, i, j);
            if (B != CellType::fluid && T != CellType::fluid) continue;
            if (B == CellType::solid || T == CellType::solid) {
                out.vel.v.at(i, j) = 0.0;
            } else {
                const double pb = (B == CellType::fluid) ? pat(i, j - 1) : 0.0;
                const double pt = (T == CellType::fluid) ? pat(i, j) : 0.0;
                out.vel.v.at(i, j) -= scale * (pt - pb);
            }
        }

    out.A_reduced = std::move(sys.A);
    out.b_reduced = std::move(sys.b);
    out.map = std::move(sys.map);
    return out;
}

std::vector<CaptureFrame> run_scene(const SceneScript& script, int n_steps, int capture_every,
                                    const StepConfig& cfg) {
    FluidState state;
    state.I = rasterize(scene_frame(script, 0));
    state.vel = MacVelocity(script.nx, script.ny, cfg.h, cfg.dt, cfg.rho);
    state.force_x = 0.0;
    state.force_y = -cfg.gravity;

    std::vector<CaptureFrame> captures;
    for (int step = 0; step < n_steps; ++step) {
        state.I = rasterize(scene_frame(script, step));
        const MacVelocity u_star = advect(state);
        ProjectionOutput out = project(state, u_star, cfg.project);
        state.vel = std::move(out.vel);
        state.t += cfg.dt;
        if (capture_every > 0 && step % capture_every == 0) {
            CaptureFrame f;
            f.step = step;
            f.I = state.I;
            f.A_reduced = std::move(out.A_reduced);
            f.b_reduced = std::move(out.b_reduced);
            f.map = std::move(out.map);
            captures.push_back(std::move(f));
        }
    }
    return captures;
}

void save_raw_f64(const Vector& v, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_raw_f64: cannot open " + path);
    std::fwrite(v.data(), sizeof(double), v.size(), f);
    std::fclose(f);
}

Vector load_raw_f64(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("load_raw_f64: cannot open " + path);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % sizeof(double) != 0)
        throw std::runtime_error("load_raw_f64: size not a multiple of 8 in " + path);
    Vector v(bytes / sizeof(double));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("load_raw_f64: short read in " + path);
    return v;
}

void write_scene_dir(const std::string& dir, const SceneScript& script, const StepConfig& cfg,
                     const std::vector<CaptureFrame>& frames) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["kind"] = script.kind;
    manifest["nx"] = script.nx;
    manifest["ny"] = script.ny;
    manifest["seed"] = script.seed;
    manifest["depth"] = script.depth;
    manifest["dt"] = cfg.dt;
    manifest["h"] = cfg.h;
    manifest["rho"] = cfg.rho;
    manifest["gravity"] = cfg.gravity;
    manifest["frames"] = nlohmann::json::array();
    char name[64];
    for (const CaptureFrame& f : frames) {
        std::snprintf(name, sizeof name, "frame_%04d", f.step);
        const std::string base = std::string(name);
        save_scn(f.I, dir + "/" + base + ".scn");
        save_triplets(f.A_reduced, dir + "/" + base + ".mtx");
        save_raw_f64(f.b_reduced, dir + "/" + base + ".rhs.f64");
        nlohmann::json row;
        row["step"] = f.step;
        row["scn"] = base + ".scn";
        row["mtx"] = base + ".mtx";
        row["rhs"] = base + ".rhs.f64";
        manifest["frames"].push_back(row);
    }
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw std::runtime_error("write_scene_dir: cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

std::vector<CaptureFrame> load_scene_dir(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw std::runtime_error("load_scene_dir: missing manifest.json in " + dir);
    nlohmann::json manifest;
    in >> manifest;

    std::vector<CaptureFrame> frames;
    for (const auto& row : manifest.at("frames")) {
        CaptureFrame f;
        f.step = row.at("step").get<int>();
        f.I = load_scn(dir + "/" + row.at("scn").get<std::string>());
        f.A_reduced = load_triplets(dir + "/" + row.at("mtx").get<std::string>());
        f.A_reduced.symmetric = true;
        f.b_reduced = load_raw_f64(dir + "/" + row.at("rhs").get<std::string>());
        f.map = ReductionMap::from_image(f.I);
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace npsd
