#pragma once

#include "npsd/net/kernels.hpp"
#include "npsd/net/params.hpp"
#include "npsd/scene.hpp"

namespace npsd::net {

/// Everything about one level that depends only on (params, image): the
/// padded image, the materialized spatially varying kernels, the linear
/// block coefficients and their image-sum factors. Built once per system
/// and shared by every apply, which is what makes solve-time evaluations
/// cheap (9 multiply-adds per pixel per conv instead of ~250).
template <typename T>
struct LevelContext {
    PaddedImage<T> image;
    KernelPlanes<T> K_down;
    KernelPlanes<T> K_up;  // finest depth-1 levels only
    T z_a = T(0), z_b = T(0);
    T lin_sums[kLinKSize] = {};  // image-window sums shared by lin_a/lin_b grads
};

template <typename T>
struct NetContext {
    int depth = 1;
    index_t nx = 0, ny = 0;
    std::vector<LevelContext<T>> levels;  // size depth, coarsest last

    static NetContext build(const NetParamsT<T>& params, const IndicatorImage& I);

    /// out = P(r) on the full grid. Reentrant; scratch is call-local.
    Field2D<T> apply(const Field2D<T>& r) const;
};

/// One custom conv block: kernels from the image window affine map, then the
/// 3x3 application with solid-padded image and zero-padded input.
template <typename T>
Field2D<T> conv_block_apply(const ConvParams<T>& p, const IndicatorImage& I, const Field2D<T>& x);

/// Fused linear block: windowed image convolution with the spatially
/// constant kernel, averaged with the 9*n_c normalizer, plus bias.
template <typename T>
T linear_block_apply(const LinParams<T>& p, const IndicatorImage& I);

/// Per-channel average pooling of a one-hot (or pooled) image; preserves the
/// channel-sum-1 invariant.
IndicatorImage avg_pool2_image(const IndicatorImage& I);

/// Full hierarchical forward pass: builds the per-level context and applies
/// it. Dims must be divisible by 2^depth.
template <typename T>
Field2D<T> forward(const NetParamsT<T>& params, const IndicatorImage& I, const Field2D<T>& r);

// --- implementation -------------------------------------------------------

template <typename T>
NetContext<T> NetContext<T>::build(const NetParamsT<T>& params, const IndicatorImage& I) {
    require(params.depth >= 1, "NetContext: depth must be >= 1");
    const index_t div = index_t{1} << params.depth;
    require(I.nx % div == 0 && I.ny % div == 0,
            "NetContext: dims " + std::to_string(I.nx) + "x" + std::to_string(I.ny) +
                " not divisible by 2^" + std::to_string(params.depth));

    NetContext ctx;
    ctx.depth = params.depth;
    ctx.nx = I.nx;
    ctx.ny = I.ny;
    ctx.levels.resize(static_cast<std::size_t>(params.depth));

    PaddedImage<T> img = PaddedImage<T>::from_image(I);
    for (int l = 0; l < params.depth; ++l) {
        LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        lc.image = std::move(img);
        if (l < params.depth - 1) {
            const LevelParams<T>& lp = params.levels[static_cast<std::size_t>(l)];
            build_kernels(lp.conv_down, lc.image, lc.K_down);
            build_kernels(lp.conv_up, lc.image, lc.K_up);
            linear_image_sums(lc.image, lc.lin_sums);
            const T norm = T(1) / (T(9) * static_cast<T>(lc.image.nx * lc.image.ny));
            T za = lp.lin_a.bias, zb = lp.lin_b.bias;
            for (int t = 0; t < kLinKSize; ++t) {
                za += norm * lp.lin_a.K[static_cast<std::size_t>(t)] * lc.lin_sums[t];
                zb += norm * lp.lin_b.K[static_cast<std::size_t>(t)] * lc.lin_sums[t];
            }
            lc.z_a = za;
            lc.z_b = zb;
            img = lc.image.pooled();
        } else {
            build_kernels(params.coarse, lc.image, lc.K_down);
        }
    }
    return ctx;
}

template <typename T>
Field2D<T> NetContext<T>::apply(const Field2D<T>& r) const {
    require(r.nx == nx && r.ny == ny, "NetContext::apply: field shape mismatch");

    std::vector<Field2D<T>> y(static_cast<std::size_t>(depth));
    PaddedField<T> xpad;
    Field2D<T> pooled, up;

    // downward sweep: conv, then restrict
    Field2D<T> x = r;
    for (int l = 0; l < depth; ++l) {
        const LevelContext<T>& lc = levels[static_cast<std::size_t>(l)];
        xpad.load_interior(x);
        apply_kernels(lc.K_down, xpad, y[static_cast<std::size_t>(l)]);
        if (l + 1 < depth) {
            avg_pool2(y[static_cast<std::size_t>(l)], pooled);
            x = pooled;
        }
    }

    // upward sweep: prolong, conv, linear combination
    Field2D<T> out = std::move(y[static_cast<std::size_t>(depth) - 1]);
    Field2D<T> u;
    for (int l = depth - 2; l >= 0; --l) {
        const LevelContext<T>& lc = levels[static_cast<std::size_t>(l)];
        upsample2(out, up);
        xpad.load_interior(up);
        apply_kernels(lc.K_up, xpad, u);
        Field2D<T>& yl = y[static_cast<std::size_t>(l)];
        out = Field2D<T>(yl.nx, yl.ny);
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = lc.z_a * yl.data[i] + lc.z_b * u.data[i];
    }
    return out;
}

template <typename T>
Field2D<T> conv_block_apply(const ConvParams<T>& p, const IndicatorImage& I, const Field2D<T>& x) {
    require(x.nx == I.nx && x.ny == I.ny, "conv_block_apply: field/image shape mismatch");
    const PaddedImage<T> img = PaddedImage<T>::from_image(I);
    KernelPlanes<T> K;
    build_kernels(p, img, K);
    PaddedField<T> xpad;
    xpad.load_interior(x);
    Field2D<T> y;
    apply_kernels(K, xpad, y);
    return y;
}

template <typename T>
T linear_block_apply(const LinParams<T>& p, const IndicatorImage& I) {
    const PaddedImage<T> img = PaddedImage<T>::from_image(I);
    return linear_block_value(p, img);
}

template <typename T>
Field2D<T> forward(const NetParamsT<T>& params, const IndicatorImage& I, const Field2D<T>& r) {
    return NetContext<T>::build(params, I).apply(r);
}

}  // namespace npsd::net
