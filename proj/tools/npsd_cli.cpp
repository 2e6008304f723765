// Command-line front end: scene rasterization, fluid simulation capture,
// training-data generation, network training, single solves, benchmarking
// and report emission.
//
// Exit codes: 0 success, 2 solver non-convergence, 3 I/O or input error.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "npsd/bench.hpp"
#include "npsd/fluid.hpp"
#include "npsd/net/precond.hpp"
#include "npsd/rng.hpp"
#include "npsd/train/train.hpp"
#include "npsd/vector_ops.hpp"

using namespace npsd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConverge = 2;
constexpr int kExitIo = 3;

struct SceneArgs {
    std::string kind = "tank";
    index_t nx = 64, ny = 64;
    int depth = 3;
    std::uint64_t seed = 0;
};

void add_scene_options(CLI::App* cmd, SceneArgs& s) {
    cmd->add_option("--scene", s.kind, "scene kind (box|tank|bubbles|drop|pillars)");
    cmd->add_option("--nx", s.nx, "cells in x");
    cmd->add_option("--ny", s.ny, "cells in y");
    cmd->add_option("--depth", s.depth, "network depth the dims must match");
    cmd->add_option("--seed", s.seed, "scene seed");
}

SceneScript to_script(const SceneArgs& s) {
    SceneScript script;
    script.kind = s.kind;
    script.nx = s.nx;
    script.ny = s.ny;
    script.seed = s.seed;
    script.depth = s.depth;
    return script;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> list_scene_dirs(const std::string& parent) {
    std::vector<std::string> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(parent))
        if (entry.is_directory() &&
            std::filesystem::exists(entry.path() / "manifest.json"))
            dirs.push_back(entry.path().string());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-grid Poisson solver toolkit with a learned preconditioner"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "worker threads (kernels and bench rows)")
        ->capture_default_str();

    // ---- rasterize ----
    auto* rast = app.add_subcommand("rasterize", "rasterize one scripted scene frame to .scn");
    SceneArgs rast_scene;
    add_scene_options(rast, rast_scene);
    int rast_frame = 0;
    std::string rast_out = "scene.scn";
    rast->add_option("--frame", rast_frame, "script step to rasterize");
    rast->add_option("--out", rast_out, "output .scn path");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "run the fluid stepper and capture frames");
    SceneArgs sim_scene;
    add_scene_options(sim, sim_scene);
    int sim_frames = 50;
    int sim_capture = 5;
    double sim_dt = 0.05, sim_gravity = 0.3;
    std::string sim_out = "out_scene";
    sim->add_option("--frames", sim_frames, "number of steps");
    sim->add_option("--capture-every", sim_capture, "capture every k-th frame");
    sim->add_option("--dt", sim_dt, "time step");
    sim->add_option("--gravity", sim_gravity, "gravity magnitude");
    sim->add_option("--out-dir", sim_out, "scene directory to write");

    // ---- gendata ----
    auto* gen = app.add_subcommand("gendata", "generate training right-hand sides for captured frames");
    std::string gen_in, gen_out = "dataset";
    index_t gen_n_ritz = 128, gen_n_rhs = 64;
    std::string gen_mode = "ritz";
    std::uint64_t gen_seed = 0;
    gen->add_option("--scenes-dir", gen_in, "parent directory of captured scene dirs")->required();
    gen->add_option("--out-dir", gen_out, "dataset directory to write");
    gen->add_option("--n-ritz", gen_n_ritz, "Ritz vectors per matrix");
    gen->add_option("--n-rhs", gen_n_rhs, "right-hand sides per matrix");
    gen->add_option("--mode", gen_mode, "rhs mode (ritz|random|masked)");
    gen->add_option("--seed", gen_seed, "base seed");

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train the preconditioner network");
    std::string tr_dataset, tr_out = "model.npm", tr_log = "train_log.csv";
    TrainConfig tr_cfg;
    int tr_val_per_scene = 1;
    tr->add_option("--dataset", tr_dataset, "dataset directory")->required();
    tr->add_option("--out", tr_out, "model file to write");
    tr->add_option("--log", tr_log, "training log CSV");
    tr->add_option("--depth", tr_cfg.depth, "network depth");
    tr->add_option("--epochs", tr_cfg.max_epochs, "training epochs");
    tr->add_option("--batch-size", tr_cfg.batch_size, "batch size");
    tr->add_option("--repeats", tr_cfg.repeats_per_matrix, "repeats per matrix per epoch");
    tr->add_option("--lr", tr_cfg.lr, "step size");
    tr->add_option("--seed", tr_cfg.seed, "training seed");
    tr->add_option("--val-per-scene", tr_val_per_scene, "held-out matrices per scene");

    // ---- solve ----
    auto* sol = app.add_subcommand("solve", "solve one captured system");
    std::string sol_frame, sol_solver = "cg", sol_precond = "none", sol_model, sol_history;
    double sol_tol = 1e6;
    index_t sol_max_iters = 2000;
    int sol_n_ortho = 2;
    sol->add_option("--frame", sol_frame, "frame prefix (expects <prefix>.scn/.mtx/.rhs.f64)")
        ->required();
    sol->add_option("--solver", sol_solver, "cg|pcg|fpcg|psd|psdo");
    sol->add_option("--precond", sol_precond, "none|jacobi|ic0|neural");
    sol->add_option("--model", sol_model, "model file for the neural preconditioner");
    sol->add_option("--tol-reduction", sol_tol, "residual reduction factor (e.g. 1e6)");
    sol->add_option("--max-iters", sol_max_iters, "iteration cap");
    sol->add_option("--n-ortho", sol_n_ortho, "PSDO orthogonalization window");
    sol->add_option("--history", sol_history, "write residual history CSV here");

    // ---- bench ----
    auto* ben = app.add_subcommand("bench", "run every method on every captured system");
    std::string ben_scenes, ben_methods = "cg,pcg+ic0,psd+neural,psdo+neural", ben_model,
                ben_out = "bench_out";
    double ben_tol = 1e6;
    index_t ben_max_iters = 2000;
    int ben_n_ortho = 2;
    ben->add_option("--scenes-dir", ben_scenes, "parent directory of captured scene dirs")
        ->required();
    ben->add_option("--methods", ben_methods, "comma list, e.g. cg,pcg+ic0,psdo+neural");
    ben->add_option("--model", ben_model, "model for *-neural methods");
    ben->add_option("--tol-reduction", ben_tol, "residual reduction factor");
    ben->add_option("--max-iters", ben_max_iters, "iteration cap");
    ben->add_option("--n-ortho", ben_n_ortho, "PSDO orthogonalization window");
    ben->add_option("--out-dir", ben_out, "bench output directory");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "aggregate a bench run into summary/speedup CSVs");
    std::string rep_in, rep_out;
    rep->add_option("--bench-dir", rep_in, "directory with rows.csv")->required();
    rep->add_option("--out-dir", rep_out, "output directory (default: bench dir)");

    CLI11_PARSE(app, argc, argv);
    omp_set_num_threads(std::max(1, threads));

    try {
        if (rast->parsed()) {
            const auto I = rasterize(scene_frame(to_script(rast_scene), rast_frame));
            save_scn(I, rast_out);
            std::printf("wrote %s (%lldx%lld)\n", rast_out.c_str(),
                        static_cast<long long>(I.nx), static_cast<long long>(I.ny));
            return kExitOk;
        }

        if (sim->parsed()) {
            StepConfig cfg;
            cfg.dt = sim_dt;
            cfg.gravity = sim_gravity;
            const auto script = to_script(sim_scene);
            const auto frames = run_scene(script, sim_frames, sim_capture, cfg);
            write_scene_dir(sim_out, script, cfg, frames);
            std::printf("captured %zu frames into %s\n", frames.size(), sim_out.c_str());
            return kExitOk;
        }

        if (gen->parsed()) {
            RhsDataset ds;
            ds.seed = gen_seed;
            ds.n_ritz = gen_n_ritz;
            ds.n_rhs = gen_n_rhs;
            ds.mode = rhs_mode_from_string(gen_mode);
            std::uint64_t stream = 0;
            for (const auto& dir : list_scene_dirs(gen_in)) {
                const std::string scene_id = std::filesystem::path(dir).filename().string();
                for (CaptureFrame& f : load_scene_dir(dir)) {
                    DatasetEntry e;
                    e.scene_id = scene_id;
                    e.frame_id = f.step;
                    e.I = std::move(f.I);
                    e.A = std::move(f.A_reduced);
                    e.map = std::move(f.map);
                    fill_entry_rhs(e, ds.mode, ds.n_ritz, ds.n_rhs, derive_seed(gen_seed, stream++));
                    ds.entries.push_back(std::move(e));
                }
            }
            if (ds.entries.empty()) {
                std::fprintf(stderr, "gendata: no captured frames under %s\n", gen_in.c_str());
                return kExitIo;
            }
            save_dataset(ds, gen_out);
            std::printf("dataset: %zu matrices x %lld rhs (%s mode) -> %s\n", ds.entries.size(),
                        static_cast<long long>(gen_n_rhs), gen_mode.c_str(), gen_out.c_str());
            return kExitOk;
        }

        if (tr->parsed()) {
            const RhsDataset full = load_dataset(tr_dataset);
            // hold out the last val_per_scene frames of each scene
            RhsDataset train_set, val_set;
            train_set.seed = val_set.seed = full.seed;
            train_set.mode = val_set.mode = full.mode;
            std::map<std::string, std::vector<const DatasetEntry*>> by_scene;
            for (const auto& e : full.entries) by_scene[e.scene_id].push_back(&e);
            for (auto& [scene, list] : by_scene) {
                const std::size_t held =
                    std::min<std::size_t>(static_cast<std::size_t>(std::max(0, tr_val_per_scene)),
                                          list.size() > 1 ? list.size() - 1 : 0);
                for (std::size_t i = 0; i < list.size(); ++i) {
                    if (i + held >= list.size())
                        val_set.entries.push_back(*list[i]);
                    else
                        train_set.entries.push_back(*list[i]);
                }
            }
            std::printf("training on %zu matrices, validating on %zu (depth %d, %d epochs)\n",
                        train_set.entries.size(), val_set.entries.size(), tr_cfg.depth,
                        tr_cfg.max_epochs);
            const auto res = train(tr_cfg, train_set, val_set);
            write_train_log_csv(res.log, tr_log);
            if (res.diverged) {
                std::fprintf(stderr, "train: diverged; log written to %s\n", tr_log.c_str());
                return kExitNoConverge;
            }
            save_npm(res.params, tr_out);
            std::printf("model -> %s (best val %.6g at epoch %d), log -> %s\n", tr_out.c_str(),
                        res.best_val, res.best_epoch, tr_log.c_str());
            return kExitOk;
        }

        if (sol->parsed()) {
            const auto I = load_scn(sol_frame + ".scn");
            auto A = load_triplets(sol_frame + ".mtx");
            A.symmetric = true;
            const Vector b = load_raw_f64(sol_frame + ".rhs.f64");
            const auto map = ReductionMap::from_image(I);

            SolveConfig cfg;
            cfg.tol_reduction = 1.0 / sol_tol;
            cfg.max_iters = sol_max_iters;
            cfg.n_ortho = sol_n_ortho;
            cfg.nullspace_projection = is_pure_neumann(I);

            std::unique_ptr<Preconditioner> P;
            if (sol_precond == "none")
                P = identity_precond(A.n_rows);
            else if (sol_precond == "jacobi")
                P = jacobi_precond(A);
            else if (sol_precond == "ic0")
                P = ic0_precond(A);
            else if (sol_precond == "neural")
                P = net::neural_precond(net::load_npm(sol_model), I, map);
            else {
                std::fprintf(stderr, "unknown preconditioner '%s'\n", sol_precond.c_str());
                return kExitIo;
            }

            SolveResult res;
            if (sol_solver == "cg")
                res = cg_solve(A, b, cfg);
            else if (sol_solver == "pcg")
                res = pcg_solve(A, b, *P, cfg);
            else if (sol_solver == "fpcg")
                res = flexible_pcg_solve(A, b, *P, cfg);
            else if (sol_solver == "psd")
                res = psd_solve(A, b, *P, cfg);
            else if (sol_solver == "psdo")
                res = psdo_solve(A, b, *P, cfg);
            else {
                std::fprintf(stderr, "unknown solver '%s'\n", sol_solver.c_str());
                return kExitIo;
            }

            if (!sol_history.empty()) write_history_csv(res.report, sol_history);
            std::printf("%s: %lld iterations, converged=%d, final residual %.3e (reduction %.3e)\n",
                        res.report.method.c_str(), static_cast<long long>(res.report.iterations),
                        res.report.converged ? 1 : 0, res.report.residual_history.back(),
                        res.report.residual_history.back() /
                            std::max(res.report.residual_history.front(), 1e-300));
            return res.report.converged ? kExitOk : kExitNoConverge;
        }

        if (ben->parsed()) {
            BenchConfig cfg;
            cfg.tol_reduction = 1.0 / ben_tol;
            cfg.max_iters = ben_max_iters;
            cfg.n_ortho = ben_n_ortho;
            cfg.model_path = ben_model;
            cfg.threads = threads;
            const auto systems = load_systems(list_scene_dirs(ben_scenes));
            if (systems.empty()) {
                std::fprintf(stderr, "bench: no systems under %s\n", ben_scenes.c_str());
                return kExitIo;
            }
            const auto methods = split_csv(ben_methods);
            const auto report = run_bench(systems, methods, cfg);
            write_bench_outputs(report, ben_out);
            write_bench_report(report.rows, ben_out);
            std::size_t failures = 0;
            for (const auto& r : report.rows)
                if (!r.error.empty() || !r.converged) ++failures;
            std::printf("bench: %zu rows (%zu systems x %zu methods), %zu failed/unconverged -> %s\n",
                        report.rows.size(), systems.size(), methods.size(), failures,
                        ben_out.c_str());
            return kExitOk;
        }

        if (rep->parsed()) {
            const auto rows = load_bench_rows(rep_in + "/rows.csv");
            write_bench_report(rows, rep_out.empty() ? rep_in : rep_out);
            std::printf("report -> %s\n", (rep_out.empty() ? rep_in : rep_out).c_str());
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitOk;
}
