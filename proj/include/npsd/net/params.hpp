#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npsd/types.hpp"

namespace npsd::net {

// 2D block shapes: a conv block maps a 3x3 image window (3 channels) to each
// of the 9 kernel slots, a linear block convolves the image with one 3x3x3
// kernel and averages.
constexpr int kSlots = 9;
constexpr int kConvWSize = kSlots * 3 * 3 * 3;  // 243
constexpr int kLinKSize = 3 * 3 * 3;            // 27

/// Slot index for window offset (dy, dx), row-major over the 3x3 window.
constexpr int slot_index(int dy, int dx) { return 3 * (dy + 1) + (dx + 1); }

/// W layout: [slot][channel][dy][dx].
constexpr int conv_w_index(int slot, int c, int dy, int dx) {
    return ((slot * 3 + c) * 3 + (dy + 1)) * 3 + (dx + 1);
}
/// K layout: [channel][dy][dx].
constexpr int lin_k_index(int c, int dy, int dx) { return (c * 3 + (dy + 1)) * 3 + (dx + 1); }

template <typename T>
struct ConvParams {
    std::vector<T> W = std::vector<T>(kConvWSize, T(0));
    std::vector<T> B = std::vector<T>(kSlots, T(0));
};

template <typename T>
struct LinParams {
    std::vector<T> K = std::vector<T>(kLinKSize, T(0));
    T bias = T(0);
};

template <typename T>
struct LevelParams {
    ConvParams<T> conv_down;
    ConvParams<T> conv_up;
    LinParams<T> lin_a;  // coefficient on the fine conv output
    LinParams<T> lin_b;  // coefficient on the conv-processed upsampled coarse output
};

/// Per-level weights of the hierarchical preconditioner. Levels 0..depth-2
/// carry two conv blocks and two linear blocks; the coarsest level is a
/// single conv block.
template <typename T>
struct NetParamsT {
    int depth = 1;
    std::vector<LevelParams<T>> levels;  // size depth-1
    ConvParams<T> coarse;

    index_t parameter_count() const {
        const index_t conv = kConvWSize + kSlots;  // 252
        const index_t lin = kLinKSize + 1;         // 28
        return static_cast<index_t>(depth - 1) * (2 * conv + 2 * lin) + conv;
    }

    /// Visits every parameter array as (pointer, length), fixed order. The
    /// scalar biases are visited as length-1 spans. Serialization, the
    /// optimizer, and finite differencing all walk this order.
    template <typename Fn>
    void for_each_span(Fn&& fn) {
        for (auto& lv : levels) {
            fn(lv.conv_down.W.data(), lv.conv_down.W.size());
            fn(lv.conv_down.B.data(), lv.conv_down.B.size());
            fn(lv.conv_up.W.data(), lv.conv_up.W.size());
            fn(lv.conv_up.B.data(), lv.conv_up.B.size());
            fn(lv.lin_a.K.data(), lv.lin_a.K.size());
            fn(&lv.lin_a.bias, std::size_t{1});
            fn(lv.lin_b.K.data(), lv.lin_b.K.size());
            fn(&lv.lin_b.bias, std::size_t{1});
        }
        fn(coarse.W.data(), coarse.W.size());
        fn(coarse.B.data(), coarse.B.size());
    }
    template <typename Fn>
    void for_each_span(Fn&& fn) const {
        const_cast<NetParamsT*>(this)->for_each_span(
            [&](auto* p, std::size_t n) { fn(static_cast<const T*>(p), n); });
    }
};

using NetParams = NetParamsT<float>;

/// Shape-congruent gradient container.
template <typename T>
NetParamsT<T> zero_like(const NetParamsT<T>& p) {
    NetParamsT<T> g;
    g.depth = p.depth;
    g.levels.resize(p.levels.size());
    return g;
}

template <typename To, typename From>
NetParamsT<To> cast_params(const NetParamsT<From>& p) {
    NetParamsT<To> out;
    out.depth = p.depth;
    out.levels.resize(p.levels.size());
    auto copy_conv = [](const ConvParams<From>& a, ConvParams<To>& b) {
        for (int i = 0; i < kConvWSize; ++i) b.W[i] = static_cast<To>(a.W[i]);
        for (int i = 0; i < kSlots; ++i) b.B[i] = static_cast<To>(a.B[i]);
    };
    auto copy_lin = [](const LinParams<From>& a, LinParams<To>& b) {
        for (int i = 0; i < kLinKSize; ++i) b.K[i] = static_cast<To>(a.K[i]);
        b.bias = static_cast<To>(a.bias);
    };
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
        copy_conv(p.levels[l].conv_down, out.levels[l].conv_down);
        copy_conv(p.levels[l].conv_up, out.levels[l].conv_up);
        copy_lin(p.levels[l].lin_a, out.levels[l].lin_a);
        copy_lin(p.levels[l].lin_b, out.levels[l].lin_b);
    }
    copy_conv(p.coarse, out.coarse);
    return out;
}

/// Uniform [-s, s] init with s = 1/sqrt(fan-in): 243 for conv blocks, 27 for
/// linear blocks.
NetParams init_params(int depth, std::uint64_t seed);

/// Model file: magic "NPMW", version, dim (2), depth, then per-level blocks
/// in for_each_span order as f32 little-endian arrays.
void save_npm(const NetParams& p, const std::string& path);
NetParams load_npm(const std::string& path);

}  // namespace npsd::net
