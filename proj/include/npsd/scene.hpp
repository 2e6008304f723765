#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npsd/types.hpp"

namespace npsd {

enum class CellType : int { fluid = 0, air = 1, solid = 2 };

/// 3-channel one-hot rasterization of the computational domain: channel 0 is
/// fluid, 1 is air (free space), 2 is solid. Planes are stored row-major,
/// channel-contiguous; values at the finest level are exactly 0.0f or 1.0f.
struct IndicatorImage {
    index_t nx = 0, ny = 0;
    std::vector<float> data;  // 3 * nx * ny, plane c starting at c*nx*ny

    IndicatorImage() = default;
    IndicatorImage(index_t nx_, index_t ny_, CellType fill = CellType::fluid);

    index_t cells() const { return nx * ny; }

    float chan(int c, index_t x, index_t y) const {
        return data[static_cast<std::size_t>(c) * static_cast<std::size_t>(nx * ny) +
                    static_cast<std::size_t>(y * nx + x)];
    }
    float& chan(int c, index_t x, index_t y) {
        return data[static_cast<std::size_t>(c) * static_cast<std::size_t>(nx * ny) +
                    static_cast<std::size_t>(y * nx + x)];
    }

    void set_cell(index_t x, index_t y, CellType t);
    bool in_bounds(index_t x, index_t y) const { return x >= 0 && x < nx && y >= 0 && y < ny; }

    /// True when every cell has exactly one channel equal to 1 and the others 0.
    bool is_one_hot() const;
};

/// Argmax channel of an in-bounds cell; exact for one-hot images.
CellType cell_type(const IndicatorImage& I, index_t x, index_t y);

/// Cell type with the outside of the domain treated as solid.
CellType cell_type_clamped(const IndicatorImage& I, index_t x, index_t y);

/// Surrounds the image with a `width`-cell ring of solid; interior unchanged.
IndicatorImage pad_image(const IndicatorImage& I, index_t width);

struct Primitive {
    enum class Shape { box, disc, half_plane };
    Shape shape = Shape::box;
    CellType type = CellType::air;
    // box: xmin ymin xmax ymax (half-open, cell-center test)
    // disc: cx cy r (strict interior)
    // half_plane: normal_x normal_y offset (n.p >= offset)
    double p0 = 0, p1 = 0, p2 = 0, p3 = 0;

    bool contains(double x, double y) const;
};

/// Procedural scene: primitives composited in listed order onto a
/// default-fluid canvas. declared_depth > 0 makes rasterize() enforce that
/// both dims are divisible by 2^depth.
struct SceneSpec {
    index_t nx = 0, ny = 0;
    std::vector<Primitive> prims;
    std::uint64_t seed = 0;
    int declared_depth = 0;
};

IndicatorImage rasterize(const SceneSpec& spec);

/// Seeded random mix of primitives, used for fuzz-style assembly tests.
SceneSpec random_scene(index_t nx, index_t ny, std::uint64_t seed);

/// Time-indexed procedural scene family; scene_frame() yields the geometry
/// at a given step so the fluid stepper can run scripted air/solid regions.
struct SceneScript {
    std::string kind = "box";  // see scene_kinds()
    index_t nx = 64, ny = 64;
    std::uint64_t seed = 0;
    int depth = 3;  // declared network depth, enforced at rasterize time
};

std::vector<std::string> scene_kinds();
SceneSpec scene_frame(const SceneScript& script, int step);

/// Binary scene file: magic "NPSC", version, dim count, dims, channel-order
/// tag "FAS", then per-channel row-major f32 little-endian planes.
void save_scn(const IndicatorImage& I, const std::string& path);
IndicatorImage load_scn(const std::string& path);

}  // namespace npsd
