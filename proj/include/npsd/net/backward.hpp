#pragma once

#include "npsd/net/forward.hpp"

namespace npsd::net {

/// Per-sample forward intermediates needed by the backward pass.
template <typename T>
struct SampleTape {
    struct Level {
        PaddedField<T> x_pad;   // padded conv_down input
        Field2D<T> y;           // conv_down output
        PaddedField<T> up_pad;  // padded upsampled coarse output (finer levels)
        Field2D<T> u;           // conv_up output (finer levels)
    };
    std::vector<Level> levels;
    Field2D<T> out;
};

/// Gradient accumulator for one batch sharing a single NetContext. Per-slot
/// products are summed across samples and contracted against the image once
/// per batch, which keeps the per-sample cost at a few multiply-adds per
/// pixel.
template <typename T>
struct BatchGrads {
    std::vector<KernelPlanes<T>> S_down;  // per level
    std::vector<KernelPlanes<T>> S_up;    // finer levels only
    std::vector<T> dz_a, dz_b;            // finer levels only
    index_t n_samples = 0;

    explicit BatchGrads(const NetContext<T>& ctx) {
        const int depth = ctx.depth;
        S_down.resize(static_cast<std::size_t>(depth));
        S_up.resize(static_cast<std::size_t>(depth - 1));
        dz_a.assign(static_cast<std::size_t>(depth - 1), T(0));
        dz_b.assign(static_cast<std::size_t>(depth - 1), T(0));
        for (int l = 0; l < depth; ++l) {
            const auto& img = ctx.levels[static_cast<std::size_t>(l)].image;
            S_down[static_cast<std::size_t>(l)] = KernelPlanes<T>(img.nx, img.ny);
            if (l < depth - 1) S_up[static_cast<std::size_t>(l)] = KernelPlanes<T>(img.nx, img.ny);
        }
    }
};

/// Forward pass recording the tape; same arithmetic as NetContext::apply.
template <typename T>
void forward_tape(const NetContext<T>& ctx, const Field2D<T>& r, SampleTape<T>& tape) {
    const int depth = ctx.depth;
    tape.levels.resize(static_cast<std::size_t>(depth));

    Field2D<T> x = r, pooled, up;
    for (int l = 0; l < depth; ++l) {
        const LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        auto& tl = tape.levels[static_cast<std::size_t>(l)];
        tl.x_pad.load_interior(x);
        apply_kernels(lc.K_down, tl.x_pad, tl.y);
        if (l + 1 < depth) {
            avg_pool2(tl.y, pooled);
            x = pooled;
        }
    }

    Field2D<T> out = tape.levels[static_cast<std::size_t>(depth) - 1].y;
    for (int l = depth - 2; l >= 0; --l) {
        const LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        auto& tl = tape.levels[static_cast<std::size_t>(l)];
        upsample2(out, up);
        tl.up_pad.load_interior(up);
        apply_kernels(lc.K_up, tl.up_pad, tl.u);
        out = Field2D<T>(tl.y.nx, tl.y.ny);
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = lc.z_a * tl.y.data[i] + lc.z_b * tl.u.data[i];
    }
    tape.out = std::move(out);
}

/// Reverse pass for one sample given g = dL/d(out); accumulates into the
/// batch gradients. The input gradient at the finest level is not needed
/// (the input is data, not a parameter) and is skipped.
template <typename T>
void backward_sample(const NetContext<T>& ctx, const SampleTape<T>& tape, const Field2D<T>& g,
                     BatchGrads<T>& acc) {
    const int depth = ctx.depth;
    acc.n_samples += 1;

    // downward: linear-combination and conv_up chains, producing the coarse
    // output gradient level by level
    std::vector<Field2D<T>> g_y(static_cast<std::size_t>(depth));  // partial dL/dy per level
    Field2D<T> g_out = g, g_u, g_up_field, tmp;
    PaddedField<T> gpad;
    for (int l = 0; l < depth - 1; ++l) {
        const LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        const auto& tl = tape.levels[static_cast<std::size_t>(l)];

        T dza = T(0), dzb = T(0);
        for (std::size_t i = 0; i < g_out.data.size(); ++i) {
            dza += g_out.data[i] * tl.y.data[i];
            dzb += g_out.data[i] * tl.u.data[i];
        }
        acc.dz_a[static_cast<std::size_t>(l)] += dza;
        acc.dz_b[static_cast<std::size_t>(l)] += dzb;

        g_y[static_cast<std::size_t>(l)] = Field2D<T>(g_out.nx, g_out.ny);
        g_u = Field2D<T>(g_out.nx, g_out.ny);
        for (std::size_t i = 0; i < g_out.data.size(); ++i) {
            g_y[static_cast<std::size_t>(l)].data[i] = lc.z_a * g_out.data[i];
            g_u.data[i] = lc.z_b * g_out.data[i];
        }

        accumulate_slot_products(g_u, tl.up_pad, acc.S_up[static_cast<std::size_t>(l)]);
        gpad.load_interior(g_u);
        conv_input_grad(lc.K_up, gpad, g_up_field);
        upsample2_backward(g_up_field, tmp);
        g_out = tmp;
    }
    g_y[static_cast<std::size_t>(depth) - 1] = std::move(g_out);

    // upward: conv_down chains through the restriction
    for (int l = depth - 1; l >= 0; --l) {
        const LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        const auto& tl = tape.levels[static_cast<std::size_t>(l)];
        Field2D<T>& gy = g_y[static_cast<std::size_t>(l)];
        accumulate_slot_products(gy, tl.x_pad, acc.S_down[static_cast<std::size_t>(l)]);
        if (l == 0) break;
        gpad.load_interior(gy);
        conv_input_grad(lc.K_down, gpad, tmp);
        Field2D<T> g_pool;
        avg_pool2_backward(tmp, g_pool);
        Field2D<T>& prev = g_y[static_cast<std::size_t>(l) - 1];
        for (std::size_t i = 0; i < prev.data.size(); ++i) prev.data[i] += g_pool.data[i];
    }
}

/// Contracts the accumulated per-slot products against the images and turns
/// dz into linear-block gradients. Produces the gradient of the *mean* batch
/// loss (sums divided by n_samples).
template <typename T>
void finalize_batch_grads(const NetContext<T>& ctx, const BatchGrads<T>& acc, NetParamsT<T>& grads) {
    const int depth = ctx.depth;
    require(acc.n_samples > 0, "finalize_batch_grads: empty batch");
    grads.depth = depth;
    grads.levels.assign(static_cast<std::size_t>(depth - 1), LevelParams<T>{});
    grads.coarse = ConvParams<T>{};

    for (int l = 0; l < depth; ++l) {
        const LevelContext<T>& lc = ctx.levels[static_cast<std::size_t>(l)];
        ConvParams<T>& cd = (l < depth - 1) ? grads.levels[static_cast<std::size_t>(l)].conv_down
                                            : grads.coarse;
        conv_param_grads(acc.S_down[static_cast<std::size_t>(l)], lc.image, cd);
        if (l < depth - 1) {
            LevelParams<T>& gl = grads.levels[static_cast<std::size_t>(l)];
            conv_param_grads(acc.S_up[static_cast<std::size_t>(l)], lc.image, gl.conv_up);
            const T norm = T(1) / (T(9) * static_cast<T>(lc.image.nx * lc.image.ny));
            for (int t = 0; t < kLinKSize; ++t) {
                gl.lin_a.K[static_cast<std::size_t>(t)] =
                    acc.dz_a[static_cast<std::size_t>(l)] * norm * lc.lin_sums[t];
                gl.lin_b.K[static_cast<std::size_t>(t)] =
                    acc.dz_b[static_cast<std::size_t>(l)] * norm * lc.lin_sums[t];
            }
            gl.lin_a.bias = acc.dz_a[static_cast<std::size_t>(l)];
            gl.lin_b.bias = acc.dz_b[static_cast<std::size_t>(l)];
        }
    }

    const T inv_n = T(1) / static_cast<T>(acc.n_samples);
    grads.for_each_span([&](T* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p[i] *= inv_n;
    });
}

}  // namespace npsd::net
