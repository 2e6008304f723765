#include "npsd/scene.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "npsd/rng.hpp"

namespace npsd {

IndicatorImage::IndicatorImage(index_t nx_, index_t ny_, CellType fill) : nx(nx_), ny(ny_) {
    require(nx_ > 0 && ny_ > 0, "IndicatorImage: dims must be positive");
    data.assign(3 * static_cast<std::size_t>(nx * ny), 0.0f);
    const std::size_t plane = static_cast<std::size_t>(static_cast<int>(fill)) *
                              static_cast<std::size_t>(nx * ny);
    for (std::size_t i = 0; i < static_cast<std::size_t>(nx * ny); ++i) data[plane + i] = 1.0f;
}

void IndicatorImage::set_cell(index_t x, index_t y, CellType t) {
    for (int c = 0; c < 3; ++c) chan(c, x, y) = 0.0f;
    chan(static_cast<int>(t), x, y) = 1.0f;
}

bool IndicatorImage::is_one_hot() const {
    for (index_t y = 0; y < ny; ++y)
        for (index_t x = 0; x < nx; ++x) {
            int ones = 0;
            for (int c = 0; c < 3; ++c) {
                const float v = chan(c, x, y);
                if (v == 1.0f)
                    ++ones;
                else if (v != 0.0f)
                    return false;
            }
            if (ones != 1) return false;
        }
    return true;
}

CellType cell_type(const IndicatorImage& I, index_t x, index_t y) {
    require(I.in_bounds(x, y), "cell_type: index out of bounds");
    int best = 0;
    float bv = I.chan(0, x, y);
    for (int c = 1; c < 3; ++c)
        if (I.chan(c, x, y) > bv) {
            bv = I.chan(c, x, y);
            best = c;
        }
    return static_cast<CellType>(best);
}

CellType cell_type_clamped(const IndicatorImage& I, index_t x, index_t y) {
    if (!I.in_bounds(x, y)) return CellType::solid;
    return cell_type(I, x, y);
}

IndicatorImage pad_image(const IndicatorImage& I, index_t width) {
    require(width >= 0, "pad_image: negative width");
    if (width == 0) return I;
    IndicatorImage out(I.nx + 2 * width, I.ny + 2 * width, CellType::solid);
    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x)
            for (int c = 0; c < 3; ++c) out.chan(c, x + width, y + width) = I.chan(c, x, y);
    return out;
}

bool Primitive::contains(double x, double y) const {
    switch (shape) {
        case Shape::box:
            return x >= p0 && y >= p1 && x < p2 && y < p3;
        case Shape::disc: {
            const double dx = x - p0, dy = y - p1;
            return dx * dx + dy * dy < p2 * p2;
        }
        case Shape::half_plane:
            return p0 * x + p1 * y >= p2;
    }
    return false;
}

IndicatorImage rasterize(const SceneSpec& spec) {
    require(spec.nx > 0 && spec.ny > 0, "rasterize: dims must be positive");
    if (spec.declared_depth > 0) {
        const index_t div = index_t{1} << spec.declared_depth;
        require(spec.nx % div == 0 && spec.ny % div == 0,
                "rasterize: dims " + std::to_string(spec.nx) + "x" + std::to_string(spec.ny) +
                    " not divisible by 2^" + std::to_string(spec.declared_depth));
    }
    IndicatorImage I(spec.nx, spec.ny, CellType::fluid);
    for (index_t y = 0; y < spec.ny; ++y)
        for (index_t x = 0; x < spec.nx; ++x) {
            const double cx = static_cast<double>(x) + 0.5;
            const double cy = static_cast<double>(y) + 0.5;
            CellType t = CellType::fluid;
            for (const Primitive& p : spec.prims)
                if (p.contains(cx, cy)) t = p.type;
            I.set_cell(x, y, t);
        }
    return I;
}

SceneSpec random_scene(index_t nx, index_t ny, std::uint64_t seed) {
    Rng rng(seed);
    SceneSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    spec.seed = seed;
    const index_t n_prims = rng.uniform_int(1, 3);
    for (index_t p = 0; p < n_prims; ++p) {
        Primitive prim;
        const double tr = rng.uniform();
        prim.type = tr < 0.45 ? CellType::air : (tr < 0.9 ? CellType::solid : CellType::fluid);
        const index_t sr = rng.uniform_int(0, 2);
        if (sr == 0) {
            prim.shape = Primitive::Shape::box;
            double x0 = rng.uniform(0, static_cast<double>(nx));
            double x1 = rng.uniform(0, static_cast<double>(nx));
            double y0 = rng.uniform(0, static_cast<double>(ny));
            double y1 = rng.uniform(0, static_cast<double>(ny));
            prim.p0 = std::min(x0, x1);
            prim.p2 = std::max(x0, x1);
            prim.p1 = std::min(y0, y1);
            prim.p3 = std::max(y0, y1);
        } else if (sr == 1) {
            prim.shape = Primitive::Shape::disc;
            prim.p0 = rng.uniform(0, static_cast<double>(nx));
            prim.p1 = rng.uniform(0, static_cast<double>(ny));
            prim.p2 = rng.uniform(1.0, static_cast<double>(std::max<index_t>(nx, ny)) / 2.5);
        } else {
            prim.shape = Primitive::Shape::half_plane;
            const double ang = rng.uniform(0, 2.0 * 3.14159265358979323846);
            prim.p0 = std::cos(ang);
            prim.p1 = std::sin(ang);
            const double px = rng.uniform(0, static_cast<double>(nx));
            const double py = rng.uniform(0, static_cast<double>(ny));
            prim.p2 = prim.p0 * px + prim.p1 * py;
        }
        spec.prims.push_back(prim);
    }
    return spec;
}

std::vector<std::string> scene_kinds() { return {"box", "tank", "bubbles", "drop", "pillars"}; }

SceneSpec scene_frame(const SceneScript& script, int step) {
    const double w = static_cast<double>(script.nx);
    const double h = static_cast<double>(script.ny);
    Rng rng(script.seed);
    SceneSpec spec;
    spec.nx = script.nx;
    spec.ny = script.ny;
    spec.seed = script.seed;
    spec.declared_depth = script.depth;
    const double t = static_cast<double>(step);

    if (script.kind == "box") {
        // empty box: all fluid, pure-Neumann regime
    } else if (script.kind == "tank") {
        // air layer on top, level slowly descending; one solid floor bump
        const double level0 = h * rng.uniform(0.6, 0.8);
        const double level = level0 - 0.05 * t;
        spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0, level, 0.0});
        const double bx = rng.uniform(0.1, 0.7) * w;
        const double bw = rng.uniform(0.1, 0.25) * w;
        const double bh = rng.uniform(0.1, 0.3) * h;
        spec.prims.push_back({Primitive::Shape::box, CellType::solid, bx, 0.0, bx + bw, bh});
    } else if (script.kind == "bubbles") {
        // shrinking, rising air discs in a full tank
        const index_t n = rng.uniform_int(1, 3);
        for (index_t i = 0; i < n; ++i) {
            const double cx = rng.uniform(0.2, 0.8) * w;
            const double cy0 = rng.uniform(0.2, 0.6) * h;
            const double r0 = rng.uniform(0.08, 0.2) * std::min(w, h);
            const double cy = std::min(cy0 + 0.1 * t, h * 0.9);
            const double r = r0 * std::max(0.0, 1.0 - 0.015 * t);
            spec.prims.push_back({Primitive::Shape::disc, CellType::air, cx, cy, r, 0.0});
        }
    } else if (script.kind == "drop") {
        // air above a falling fluid drop
        const double level = h * rng.uniform(0.35, 0.55);
        spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0, level, 0.0});
        const double cx = rng.uniform(0.3, 0.7) * w;
        const double cy0 = rng.uniform(0.75, 0.9) * h;
        const double r = rng.uniform(0.08, 0.16) * std::min(w, h);
        const double cy = std::max(cy0 - 0.2 * t, level * 0.5);
        spec.prims.push_back({Primitive::Shape::disc, CellType::fluid, cx, cy, r, 0.0});
    } else if (script.kind == "pillars") {
        // air top, solid pillars rising from the floor
        const double level = h * rng.uniform(0.65, 0.8);
        spec.prims.push_back({Primitive::Shape::half_plane, CellType::air, 0.0, 1.0, level, 0.0});
        const index_t n = rng.uniform_int(2, 3);
        for (index_t i = 0; i < n; ++i) {
            const double px = (static_cast<double>(i) + rng.uniform(0.25, 0.75)) * w /
                              static_cast<double>(n + 1);
            const double pw = rng.uniform(0.04, 0.1) * w;
            const double ph = rng.uniform(0.3, 0.55) * h;
            spec.prims.push_back({Primitive::Shape::box, CellType::solid, px, 0.0, px + pw, ph});
        }
    } else {
        throw std::invalid_argument("scene_frame: unknown scene kind '" + script.kind + "'");
    }
    return spec;
}

namespace {
constexpr char kScnMagic[4] = {'N', 'P', 'S', 'C'};
constexpr char kChannelTag[4] = {'F', 'A', 'S', '\0'};
constexpr std::uint32_t kScnVersion = 1;

void write_u32(std::FILE* f, std::uint32_t v) { std::fwrite(&v, sizeof v, 1, f); }
std::uint32_t read_u32(std::FILE* f, const std::string& path) {
    std::uint32_t v = 0;
    if (std::fread(&v, sizeof v, 1, f) != 1)
        throw std::runtime_error("load_scn: truncated file " + path);
    return v;
}
}  // namespace

void save_scn(const IndicatorImage& I, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_scn: cannot open " + path);
    std::fwrite(kScnMagic, 1, 4, f);
    write_u32(f, kScnVersion);
    write_u32(f, 2);
    write_u32(f, static_cast<std::uint32_t>(I.nx));
    write_u32(f, static_cast<std::uint32_t>(I.ny));
    std::fwrite(kChannelTag, 1, 4, f);
    std::fwrite(I.data.data(), sizeof(float), I.data.size(), f);
    std::fclose(f);
}

IndicatorImage load_scn(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_scn: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kScnMagic, 4) != 0) {
        std::fclose(f);
        throw std::runtime_error("load_scn: bad magic in " + path);
    }
    const std::uint32_t version = read_u32(f, path);
    const std::uint32_t dims = read_u32(f, path);
    if (version != kScnVersion || dims != 2) {
        std::fclose(f);
        throw std::runtime_error("load_scn: unsupported version/dims in " + path);
    }
    const std::uint32_t nx = read_u32(f, path);
    const std::uint32_t ny = read_u32(f, path);
    char tag[4];
    if (std::fread(tag, 1, 4, f) != 4 || std::memcmp(tag, kChannelTag, 4) != 0) {
        std::fclose(f);
        throw std::runtime_error("load_scn: unknown channel order tag in " + path);
    }
    IndicatorImage I(static_cast<index_t>(nx), static_cast<index_t>(ny));
    const std::size_t want = I.data.size();
    const std::size_t got = std::fread(I.data.data(), sizeof(float), want, f);
    std::fclose(f);
    if (got != want) throw std::runtime_error("load_scn: truncated planes in " + path);
    return I;
}

}  // namespace npsd
