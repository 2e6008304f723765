#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "npsd/fluid.hpp"
#include "npsd/rng.hpp"
#include "npsd/vector_ops.hpp"
#include "oracles.hpp"

using namespace npsd;

namespace {
// discrete divergence of the corrected field over fluid cells, with solid
// faces at their prescribed (zero) values
double max_fluid_divergence(const MacVelocity& vel, const IndicatorImage& I) {
    double worst = 0.0;
    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x) {
            if (cell_type(I, x, y) != CellType::fluid) continue;
            auto uf = [&](index_t fx, index_t fy, index_t nbx, index_t nby) {
                return cell_type_clamped(I, nbx, nby) == CellType::solid ? 0.0 : vel.u.at(fx, fy);
            };
            auto vf = [&](index_t fx, index_t fy, index_t nbx, index_t nby) {
                return cell_type_clamped(I, nbx, nby) == CellType::solid ? 0.0 : vel.v.at(fx, fy);
            };
            const double s = uf(x + 1, y, x + 1, y) - uf(x, y, x - 1, y) +
                             vf(x, y + 1, x, y + 1) - vf(x, y, x, y - 1);
            worst = std::max(worst, std::abs(s) / vel.h);
        }
    return worst;
}

double linf(const MacVelocity& vel) {
    double m = 0.0;
    for (double v : vel.u.data) m = std::max(m, std::abs(v));
    for (double v : vel.v.data) m = std::max(m, std::abs(v));
    return m;
}
}  // namespace

TEST_CASE("advect: zero velocity and zero force stay zero") {
    FluidState s;
    s.I = IndicatorImage(8, 8, CellType::fluid);
    s.vel = MacVelocity(8, 8);
    const auto u = advect(s);
    for (double v : u.u.data) CHECK(v == 0.0);
    for (double v : u.v.data) CHECK(v == 0.0);
}

TEST_CASE("advect: force-only update") {
    FluidState s;
    s.I = IndicatorImage(8, 8, CellType::fluid);
    s.vel = MacVelocity(8, 8, 1.0, 0.05, 1.0);
    s.force_y = -9.0;
    const auto u = advect(s);
    for (double v : u.u.data) CHECK(v == 0.0);
    for (double v : u.v.data) CHECK(v == doctest::Approx(-9.0 * 0.05).epsilon(1e-14));
}

TEST_CASE("advect: constant field is a fixed point") {
    FluidState s;
    s.I = IndicatorImage(8, 8, CellType::fluid);
    s.vel = MacVelocity(8, 8, 1.0, 0.05, 1.0);
    for (auto& v : s.vel.u.data) v = 1.3;
    for (auto& v : s.vel.v.data) v = -0.4;
    const auto u = advect(s);
    for (double v : u.u.data) CHECK(v == doctest::Approx(1.3).epsilon(1e-13));
    for (double v : u.v.data) CHECK(v == doctest::Approx(-0.4).epsilon(1e-13));
}

TEST_CASE("project: divergence-free input in a pure-Neumann box is unchanged") {
    FluidState s;
    s.I = IndicatorImage(8, 8, CellType::fluid);
    s.vel = MacVelocity(8, 8, 1.0, 0.05, 1.0);
    // interior-only uniform field is NOT divergence-free against zero
    // boundary faces, so use the zero field (trivially divergence-free)
    const auto out = project(s, s.vel);
    for (double v : out.vel.u.data) CHECK(std::abs(v) < 1e-12);
    for (double v : out.vel.v.data) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("project: random velocity becomes discretely divergence-free") {
    SceneSpec spec;
    spec.nx = spec.ny = 16;
    spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0, 12.0, 0.0});
    spec.prims.push_back({Primitive::Shape::disc, CellType::solid, 5.0, 4.0, 2.5, 0.0});
    FluidState s;
    s.I = rasterize(spec);
    s.vel = MacVelocity(16, 16, 1.0, 0.05, 1.0);
    Rng rng(3);
    for (auto& v : s.vel.u.data) v = rng.normal();
    for (auto& v : s.vel.v.data) v = rng.normal();

    const auto out = project(s, s.vel);
    const double bound = 1e-8 * linf(s.vel) / s.vel.h;
    CHECK(max_fluid_divergence(out.vel, s.I) <= bound);
}

TEST_CASE("project: dirichlet value enters through the air-adjacent diagonal") {
    // two fluid cells, air above; hydrostatic balance fixes the pressure of
    // the cell under the air boundary to rho*g*h/2-style increments
    SceneSpec spec;
    spec.nx = 1;
    spec.ny = 4;
    spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0, 2.0, 0.0});
    FluidState s;
    s.I = rasterize(spec);
    s.vel = MacVelocity(1, 4, 1.0, 0.1, 1.0);
    s.force_y = -10.0;
    const auto u_star = advect(s);
    const auto out = project(s, u_star);

    // gravity must be exactly balanced on fluid-adjacent faces (air-air
    // faces above keep their advected value)
    for (index_t j = 0; j < 3; ++j) CHECK(std::abs(out.vel.v.at(0, j)) < 1e-10);
    // pressure at the top fluid cell reflects p_air = 0 through the diagonal:
    // A p = b gives 3 p1 - p0 = b1 with p_air pinned at zero
    const auto& p = out.pressure_full;
    CHECK(p[static_cast<std::size_t>(1)] > 0.0);
    CHECK(p[static_cast<std::size_t>(0)] > p[static_cast<std::size_t>(1)]);
}

TEST_CASE("run_scene: n_steps=0 gives no captures") {
    SceneScript script;
    script.kind = "box";
    script.nx = script.ny = 16;
    script.depth = 2;
    CHECK(run_scene(script, 0, 1).empty());
}

TEST_CASE("run_scene: static geometry yields identical matrices per frame") {
    SceneScript script;
    script.kind = "box";
    script.nx = script.ny = 16;
    script.depth = 2;
    StepConfig cfg;
    cfg.gravity = 0.0;
    const auto frames = run_scene(script, 3, 1, cfg);
    REQUIRE(frames.size() == 3);
    for (const auto& f : frames) {
        CHECK(f.A_reduced.values == frames[0].A_reduced.values);
        CHECK(f.A_reduced.col_indices == frames[0].A_reduced.col_indices);
    }
}

TEST_CASE("run_scene: shrinking bubbles increase the fluid count") {
    SceneScript script;
    script.kind = "bubbles";
    script.nx = script.ny = 32;
    script.seed = 4;
    script.depth = 3;
    const auto frames = run_scene(script, 12, 4);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].map.reduced_size() < frames[1].map.reduced_size());
    CHECK(frames[1].map.reduced_size() < frames[2].map.reduced_size());
}

TEST_CASE("run_scene: captured A matches assemble_poisson of the captured image bitwise") {
    SceneScript script;
    script.kind = "tank";
    script.nx = script.ny = 32;
    script.seed = 9;
    script.depth = 3;
    const auto frames = run_scene(script, 4, 2);
    REQUIRE(frames.size() == 2);
    for (const auto& f : frames) {
        const auto A_full = assemble_poisson(f.I);
        const auto sys = reduce(A_full, Vector(static_cast<std::size_t>(A_full.n_rows), 0.0), f.I);
        CHECK(sys.A.row_offsets == f.A_reduced.row_offsets);
        CHECK(sys.A.col_indices == f.A_reduced.col_indices);
        CHECK(sys.A.values == f.A_reduced.values);
    }
}

TEST_CASE("run_scene: post-projection divergence bound on every captured frame") {
    SceneScript script;
    script.kind = "drop";
    script.nx = script.ny = 32;
    script.seed = 2;
    script.depth = 3;

    // recompute u* by stepping manually alongside run_scene
    StepConfig cfg;
    FluidState state;
    state.I = rasterize(scene_frame(script, 0));
    state.vel = MacVelocity(script.nx, script.ny, cfg.h, cfg.dt, cfg.rho);
    state.force_y = -cfg.gravity;
    for (int step = 0; step < 6; ++step) {
        state.I = rasterize(scene_frame(script, step));
        const auto u_star = advect(state);
        const auto out = project(state, u_star, cfg.project);
        const double bound = 1e-8 * std::max(linf(u_star), 1e-30) / cfg.h;
        CHECK(max_fluid_divergence(out.vel, state.I) <= bound);
        state.vel = out.vel;
    }
}

TEST_CASE("scene directory round trip") {
    SceneScript script;
    script.kind = "pillars";
    script.nx = script.ny = 16;
    script.seed = 12;
    script.depth = 2;
    StepConfig cfg;
    const auto frames = run_scene(script, 4, 2, cfg);
    const std::string dir = "scene_dir_test";
    write_scene_dir(dir, script, cfg, frames);
    const auto loaded = load_scene_dir(dir);
    REQUIRE(loaded.size() == frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(loaded[i].step == frames[i].step);
        CHECK(loaded[i].I.data == frames[i].I.data);
        CHECK(loaded[i].A_reduced.values == frames[i].A_reduced.values);
        CHECK(loaded[i].b_reduced == frames[i].b_reduced);
    }
    std::filesystem::remove_all(dir);
}
