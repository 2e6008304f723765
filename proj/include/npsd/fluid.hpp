#pragma once

#include <string>
#include <vector>

#include "npsd/discretization.hpp"
#include "npsd/scene.hpp"
#include "npsd/solver.hpp"

namespace npsd {

/// State advanced by the Chorin-splitting stepper. Geometry comes from the
/// scene script each step; velocity carries over.
struct FluidState {
    MacVelocity vel;
    IndicatorImage I;
    double t = 0.0;
    double force_x = 0.0;
    double force_y = 0.0;
};

/// Semi-Lagrangian advection with bilinear interpolation and clamped
/// backtraces, followed by the external-force increment dt*f/rho.
MacVelocity advect(const FluidState& state);

struct ProjectConfig {
    /// Residual reduction for the pressure solve. Tight by default so the
    /// post-projection divergence bound holds with margin.
    double tol_reduction = 1e-11;
    index_t max_iters = 0;  // 0 = 10 * n_f
    bool use_ic0 = true;    // fall back to plain CG if factorization fails
};

struct ProjectionOutput {
    MacVelocity vel;        // divergence-free velocity
    SparseMatrix A_reduced;
    Vector b_reduced;
    ReductionMap map;
    Vector pressure_full;   // solved pressure padded to n_c (0 in air/solid)
    SolveReport report;
};

/// Pressure projection: assembles the mixed-BC system for state.I, solves
/// it, and applies the gradient correction on fluid faces. Neumann faces
/// keep their prescribed normal velocity.
ProjectionOutput project(const FluidState& state, const MacVelocity& u_star,
                         const ProjectConfig& cfg = {});

struct CaptureFrame {
    int step = 0;
    IndicatorImage I;
    SparseMatrix A_reduced;
    Vector b_reduced;
    ReductionMap map;
};

struct StepConfig {
    double dt = 0.05;
    double h = 1.0;
    double rho = 1.0;
    double gravity = 0.3;  // applied as force_y = -gravity
    ProjectConfig project;
};

/// Runs n_steps of the scripted scene and captures every capture_every-th
/// frame's (I, A_reduced, b_reduced). Deterministic for a fixed script.
std::vector<CaptureFrame> run_scene(const SceneScript& script, int n_steps, int capture_every,
                                    const StepConfig& cfg = {});

/// Writes frames as frame_%04d.scn / .mtx / .rhs.f64 plus a manifest.json
/// listing them; load_scene_dir reads the directory back.
void write_scene_dir(const std::string& dir, const SceneScript& script, const StepConfig& cfg,
                     const std::vector<CaptureFrame>& frames);
std::vector<CaptureFrame> load_scene_dir(const std::string& dir);

void save_raw_f64(const Vector& v, const std::string& path);
Vector load_raw_f64(const std::string& path);

}  // namespace npsd
