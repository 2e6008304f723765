#include <cmath>
#include <cstdio>
#include <cstring>

#include "npsd/net/forward.hpp"
#include "npsd/net/params.hpp"
#include "npsd/rng.hpp"

namespace npsd::net {

NetParams init_params(int depth, std::uint64_t seed) {
    require(depth >= 1, "init_params: depth must be >= 1");
    NetParams p;
    p.depth = depth;
    p.levels.resize(static_cast<std::size_t>(depth - 1));
    Rng rng(seed);
    auto fill_conv = [&](ConvParams<float>& c) {
        const double s = 1.0 / std::sqrt(static_cast<double>(kConvWSize));
        for (auto& w : c.W) w = static_cast<float>(rng.uniform(-s, s));
        for (auto& b : c.B) b = static_cast<float>(rng.uniform(-s, s));
    };
    auto fill_lin = [&](LinParams<float>& c) {
        const double s = 1.0 / std::sqrt(static_cast<double>(kLinKSize));
        for (auto& k : c.K) k = static_cast<float>(rng.uniform(-s, s));
        c.bias = static_cast<float>(rng.uniform(-s, s));
    };
    for (auto& lv : p.levels) {
        fill_conv(lv.conv_down);
        fill_conv(lv.conv_up);
        fill_lin(lv.lin_a);
        fill_lin(lv.lin_b);
    }
    fill_conv(p.coarse);
    return p;
}

namespace {
constexpr char kNpmMagic[4] = {'N', 'P', 'M', 'W'};
constexpr std::uint32_t kNpmVersion = 1;
}  // namespace

void save_npm(const NetParams& p, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_npm: cannot open " + path);
    std::fwrite(kNpmMagic, 1, 4, f);
    const std::uint32_t header[3] = {kNpmVersion, 2u, static_cast<std::uint32_t>(p.depth)};
    std::fwrite(header, sizeof(std::uint32_t), 3, f);
    const_cast<NetParams&>(p).for_each_span([&](float* ptr, std::size_t n) {
        std::fwrite(ptr, sizeof(float), n, f);
    });
    std::fclose(f);
}

NetParams load_npm(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_npm: cannot open " + path);
    char magic[4];
    std::uint32_t header[3];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kNpmMagic, 4) != 0 ||
        std::fread(header, sizeof(std::uint32_t), 3, f) != 3) {
        std::fclose(f);
        throw std::runtime_error("load_npm: bad header in " + path);
    }
    if (header[0] != kNpmVersion || header[1] != 2 || header[2] < 1) {
        std::fclose(f);
        throw std::runtime_error("load_npm: unsupported version/dim/depth in " + path);
    }
    NetParams p;
    p.depth = static_cast<int>(header[2]);
    p.levels.resize(static_cast<std::size_t>(p.depth - 1));
    bool ok = true;
    p.for_each_span([&](float* ptr, std::size_t n) {
        if (std::fread(ptr, sizeof(float), n, f) != n) ok = false;
    });
    std::fclose(f);
    if (!ok) throw std::runtime_error("load_npm: truncated parameter data in " + path);
    return p;
}

IndicatorImage avg_pool2_image(const IndicatorImage& I) {
    require(I.nx % 2 == 0 && I.ny % 2 == 0, "avg_pool2_image: dims must be even");
    IndicatorImage out(I.nx / 2, I.ny / 2);
    for (int c = 0; c < 3; ++c)
        for (index_t y = 0; y < out.ny; ++y)
            for (index_t x = 0; x < out.nx; ++x)
                out.chan(c, x, y) = 0.25f * (I.chan(c, 2 * x, 2 * y) + I.chan(c, 2 * x + 1, 2 * y) +
                                             I.chan(c, 2 * x, 2 * y + 1) +
                                             I.chan(c, 2 * x + 1, 2 * y + 1));
    return out;
}

}  // namespace npsd::net
