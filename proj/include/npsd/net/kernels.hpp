#pragma once

#include "npsd/net/params.hpp"
#include "npsd/scene.hpp"
#include "npsd/types.hpp"

namespace npsd::net {

/// Indicator image at one level with a 1-pixel solid ring so window reads
/// never branch. Channel-major, each plane (nx+2) x (ny+2); accessors take
/// interior coordinates in [-1, nx] x [-1, ny].
template <typename T>
struct PaddedImage {
    index_t nx = 0, ny = 0;
    std::vector<T> data;

    PaddedImage() = default;
    PaddedImage(index_t nx_, index_t ny_) : nx(nx_), ny(ny_) {
        data.assign(3 * static_cast<std::size_t>((nx + 2) * (ny + 2)), T(0));
        // solid ring
        for (index_t y = -1; y <= ny; ++y)
            for (index_t x = -1; x <= nx; ++x)
                if (x == -1 || x == nx || y == -1 || y == ny) at(2, x, y) = T(1);
    }

    index_t plane() const { return (nx + 2) * (ny + 2); }
    T& at(int c, index_t x, index_t y) {
        return data[static_cast<std::size_t>(c * plane() + (y + 1) * (nx + 2) + (x + 1))];
    }
    T at(int c, index_t x, index_t y) const {
        return data[static_cast<std::size_t>(c * plane() + (y + 1) * (nx + 2) + (x + 1))];
    }
    const T* row(int c, index_t y) const {  // pointer to x = -1
        return data.data() + static_cast<std::size_t>(c * plane() + (y + 1) * (nx + 2));
    }

    static PaddedImage from_image(const IndicatorImage& I) {
        PaddedImage out(I.nx, I.ny);
        for (int c = 0; c < 3; ++c)
            for (index_t y = 0; y < I.ny; ++y)
                for (index_t x = 0; x < I.nx; ++x) out.at(c, x, y) = static_cast<T>(I.chan(c, x, y));
        return out;
    }

    /// Average-pools the interior per channel and re-pads with solid.
    PaddedImage pooled() const {
        require(nx % 2 == 0 && ny % 2 == 0, "PaddedImage::pooled: odd dims");
        PaddedImage out(nx / 2, ny / 2);
        for (int c = 0; c < 3; ++c)
            for (index_t y = 0; y < out.ny; ++y)
                for (index_t x = 0; x < out.nx; ++x)
                    out.at(c, x, y) = static_cast<T>(0.25) *
                                      (at(c, 2 * x, 2 * y) + at(c, 2 * x + 1, 2 * y) +
                                       at(c, 2 * x, 2 * y + 1) + at(c, 2 * x + 1, 2 * y + 1));
        return out;
    }
};

/// Scalar field with a 1-pixel zero ring; interior coordinates in [-1, nx].
template <typename T>
struct PaddedField {
    index_t nx = 0, ny = 0;
    std::vector<T> data;

    PaddedField() = default;
    PaddedField(index_t nx_, index_t ny_) : nx(nx_), ny(ny_) {
        data.assign(static_cast<std::size_t>((nx + 2) * (ny + 2)), T(0));
    }

    void resize(index_t nx_, index_t ny_) {
        nx = nx_;
        ny = ny_;
        data.assign(static_cast<std::size_t>((nx + 2) * (ny + 2)), T(0));
    }

    T& at(index_t x, index_t y) { return data[static_cast<std::size_t>((y + 1) * (nx + 2) + (x + 1))]; }
    T at(index_t x, index_t y) const {
        return data[static_cast<std::size_t>((y + 1) * (nx + 2) + (x + 1))];
    }
    const T* row(index_t y) const {
        return data.data() + static_cast<std::size_t>((y + 1) * (nx + 2));
    }

    void load_interior(const Field2D<T>& f) {
        if (nx != f.nx || ny != f.ny) resize(f.nx, f.ny);
        for (index_t y = 0; y < ny; ++y)
            for (index_t x = 0; x < nx; ++x) at(x, y) = f.at(x, y);
    }
};

/// Spatially varying 3x3 kernels, one 9-vector per pixel (slot-contiguous),
/// with a zero ring so scatter-style reads stay branch-free.
template <typename T>
struct KernelPlanes {
    index_t nx = 0, ny = 0;
    std::vector<T> data;  // ((ny+2)*(nx+2)) * 9

    KernelPlanes() = default;
    KernelPlanes(index_t nx_, index_t ny_) : nx(nx_), ny(ny_) {
        data.assign(static_cast<std::size_t>((nx + 2) * (ny + 2) * 9), T(0));
    }

    void zero() { std::fill(data.begin(), data.end(), T(0)); }

    T* at(index_t x, index_t y) {
        return data.data() + static_cast<std::size_t>(((y + 1) * (nx + 2) + (x + 1)) * 9);
    }
    const T* at(index_t x, index_t y) const {
        return data.data() + static_cast<std::size_t>(((y + 1) * (nx + 2) + (x + 1)) * 9);
    }
};

// ---------------------------------------------------------------------------
// Data-parallel kernels. Each has a serial reference twin in net::ref used by
// the kernel tests and the kernel benchmark; outputs are bitwise identical
// for any thread count because every output element is computed by exactly
// one thread in the same order as the serial loop.
// ---------------------------------------------------------------------------

/// K(x,y)[slot(dy,dx)] = B[slot] + sum_c sum_{l,m} W[slot,c,l,m] I(c, x+m, y+l)
template <typename T>
void build_kernels(const ConvParams<T>& p, const PaddedImage<T>& I, KernelPlanes<T>& K) {
    if (K.nx != I.nx || K.ny != I.ny) K = KernelPlanes<T>(I.nx, I.ny);
    const index_t nx = I.nx, ny = I.ny;
#pragma omp parallel for schedule(static) if (nx * ny > 4096)
    for (index_t y = 0; y < ny; ++y) {
        for (index_t x = 0; x < nx; ++x) {
            T* k = K.at(x, y);
            for (int s = 0; s < kSlots; ++s) {
                T acc = p.B[static_cast<std::size_t>(s)];
                const T* w = p.W.data() + s * 27;
                for (int c = 0; c < 3; ++c)
                    for (int dy = -1; dy <= 1; ++dy) {
                        const T* irow = I.row(c, y + dy) + x;  // points at x-1
                        const T* wrow = w + (c * 3 + (dy + 1)) * 3;
                        acc += wrow[0] * irow[0];
                        acc += wrow[1] * irow[1];
                        acc += wrow[2] * irow[2];
                    }
                k[s] = acc;
            }
        }
    }
}

/// y(x,y) = sum_{dy,dx} K(x,y)[slot(dy,dx)] * xpad(x+dx, y+dy)
template <typename T>
void apply_kernels(const KernelPlanes<T>& K, const PaddedField<T>& xp, Field2D<T>& y) {
    require(K.nx == xp.nx && K.ny == xp.ny, "apply_kernels: shape mismatch");
    if (y.nx != K.nx || y.ny != K.ny) y = Field2D<T>(K.nx, K.ny);
    const index_t nx = K.nx, ny = K.ny;
#pragma omp parallel for schedule(static) if (nx * ny > 4096)
    for (index_t j = 0; j < ny; ++j) {
        for (index_t i = 0; i < nx; ++i) {
            const T* k = K.at(i, j);
            const T* r0 = xp.row(j - 1) + i;  // x-1
            const T* r1 = xp.row(j) + i;
            const T* r2 = xp.row(j + 1) + i;
            T acc = T(0);
            acc += k[0] * r0[0];
            acc += k[1] * r0[1];
            acc += k[2] * r0[2];
            acc += k[3] * r1[0];
            acc += k[4] * r1[1];
            acc += k[5] * r1[2];
            acc += k[6] * r2[0];
            acc += k[7] * r2[1];
            acc += k[8] * r2[2];
            y.at(i, j) = acc;
        }
    }
}

/// dx(p,q) = sum_{dy,dx} K(p-dx, q-dy)[slot(dy,dx)] * gpad(p-dx, q-dy)
template <typename T>
void conv_input_grad(const KernelPlanes<T>& K, const PaddedField<T>& gp, Field2D<T>& dx) {
    require(K.nx == gp.nx && K.ny == gp.ny, "conv_input_grad: shape mismatch");
    if (dx.nx != K.nx || dx.ny != K.ny) dx = Field2D<T>(K.nx, K.ny);
    const index_t nx = K.nx, ny = K.ny;
#pragma omp parallel for schedule(static) if (nx * ny > 4096)
    for (index_t q = 0; q < ny; ++q) {
        for (index_t p = 0; p < nx; ++p) {
            T acc = T(0);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dxo = -1; dxo <= 1; ++dxo)
                    acc += K.at(p - dxo, q - dy)[slot_index(dy, dxo)] * gp.at(p - dxo, q - dy);
            dx.at(p, q) = acc;
        }
    }
}

/// S(x,y)[slot(dy,dx)] += g(x,y) * xpad(x+dx, y+dy); the per-slot products
/// summed over a batch feed conv_param_grads once per batch.
template <typename T>
void accumulate_slot_products(const Field2D<T>& g, const PaddedField<T>& xp, KernelPlanes<T>& S) {
    require(g.nx == xp.nx && g.ny == xp.ny, "accumulate_slot_products: shape mismatch");
    if (S.nx != g.nx || S.ny != g.ny) S = KernelPlanes<T>(g.nx, g.ny);
    const index_t nx = g.nx, ny = g.ny;
#pragma omp parallel for schedule(static) if (nx * ny > 4096)
    for (index_t j = 0; j < ny; ++j) {
        for (index_t i = 0; i < nx; ++i) {
            const T gv = g.at(i, j);
            T* s = S.at(i, j);
            const T* r0 = xp.row(j - 1) + i;
            const T* r1 = xp.row(j) + i;
            const T* r2 = xp.row(j + 1) + i;
            s[0] += gv * r0[0];
            s[1] += gv * r0[1];
            s[2] += gv * r0[2];
            s[3] += gv * r1[0];
            s[4] += gv * r1[1];
            s[5] += gv * r1[2];
            s[6] += gv * r2[0];
            s[7] += gv * r2[1];
            s[8] += gv * r2[2];
        }
    }
}

/// dW[slot,c,l,m] += sum_xy S(x,y)[slot] * I(c, x+m, y+l); dB[slot] +=
/// sum_xy S(x,y)[slot]. Parallel over slots, serial within one, so results
/// match the reference bitwise for any thread count.
template <typename T>
void conv_param_grads(const KernelPlanes<T>& S, const PaddedImage<T>& I, ConvParams<T>& grad) {
    require(S.nx == I.nx && S.ny == I.ny, "conv_param_grads: shape mismatch");
    const index_t nx = I.nx, ny = I.ny;
#pragma omp parallel for schedule(static)
    for (int s = 0; s < kSlots; ++s) {
        T db = T(0);
        T dw[27];
        for (int t = 0; t < 27; ++t) dw[t] = T(0);
        for (index_t y = 0; y < ny; ++y)
            for (index_t x = 0; x < nx; ++x) {
                const T sv = S.at(x, y)[s];
                if (sv == T(0)) continue;
                db += sv;
                for (int c = 0; c < 3; ++c)
                    for (int dy = -1; dy <= 1; ++dy) {
                        const T* irow = I.row(c, y + dy) + x;
                        T* dwrow = dw + (c * 3 + (dy + 1)) * 3;
                        dwrow[0] += sv * irow[0];
                        dwrow[1] += sv * irow[1];
                        dwrow[2] += sv * irow[2];
                    }
            }
        grad.B[static_cast<std::size_t>(s)] += db;
        for (int t = 0; t < 27; ++t) grad.W[static_cast<std::size_t>(s * 27 + t)] += dw[t];
    }
}

/// F[c,l,m] = sum_xy I(c, x+m, y+l): the image-window sums behind a linear
/// block, so z = bias + dot(K, F) / (9 n_c) and dz/dK = F / (9 n_c).
template <typename T>
void linear_image_sums(const PaddedImage<T>& I, T F[kLinKSize]) {
    for (int t = 0; t < kLinKSize; ++t) F[t] = T(0);
    for (int c = 0; c < 3; ++c)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dxo = -1; dxo <= 1; ++dxo) {
                T acc = T(0);
                for (index_t y = 0; y < I.ny; ++y) {
                    const T* row = I.row(c, y + dy) + 1 + dxo;  // element x reads I(c, x+dxo, y+dy)
                    for (index_t x = 0; x < I.nx; ++x) acc += row[x];
                }
                F[lin_k_index(c, dy, dxo)] = acc;
            }
}

template <typename T>
T linear_block_value(const LinParams<T>& p, const PaddedImage<T>& I) {
    T F[kLinKSize];
    linear_image_sums(I, F);
    T acc = T(0);
    for (int t = 0; t < kLinKSize; ++t) acc += p.K[static_cast<std::size_t>(t)] * F[t];
    const T norm = T(1) / (T(9) * static_cast<T>(I.nx * I.ny));
    return p.bias + norm * acc;
}

/// Mean over each 2x2 block. Errors on odd dims.
template <typename T>
void avg_pool2(const Field2D<T>& x, Field2D<T>& out) {
    require(x.nx % 2 == 0 && x.ny % 2 == 0, "avg_pool2: dims must be even");
    if (out.nx != x.nx / 2 || out.ny != x.ny / 2) out = Field2D<T>(x.nx / 2, x.ny / 2);
#pragma omp parallel for schedule(static) if (x.nx * x.ny > 16384)
    for (index_t y = 0; y < out.ny; ++y)
        for (index_t x2 = 0; x2 < out.nx; ++x2)
            out.at(x2, y) = static_cast<T>(0.25) *
                            (x.at(2 * x2, 2 * y) + x.at(2 * x2 + 1, 2 * y) +
                             x.at(2 * x2, 2 * y + 1) + x.at(2 * x2 + 1, 2 * y + 1));
}

/// Nearest-neighbor replication into 2x2 blocks; avg_pool2(upsample2(x)) == x.
template <typename T>
void upsample2(const Field2D<T>& x, Field2D<T>& out) {
    if (out.nx != 2 * x.nx || out.ny != 2 * x.ny) out = Field2D<T>(2 * x.nx, 2 * x.ny);
#pragma omp parallel for schedule(static) if (x.nx * x.ny > 16384)
    for (index_t y = 0; y < x.ny; ++y)
        for (index_t i = 0; i < x.nx; ++i) {
            const T v = x.at(i, y);
            out.at(2 * i, 2 * y) = v;
            out.at(2 * i + 1, 2 * y) = v;
            out.at(2 * i, 2 * y + 1) = v;
            out.at(2 * i + 1, 2 * y + 1) = v;
        }
}

/// Gradient of avg_pool2: spread a quarter of each coarse value.
template <typename T>
void avg_pool2_backward(const Field2D<T>& g_coarse, Field2D<T>& g_fine) {
    if (g_fine.nx != 2 * g_coarse.nx || g_fine.ny != 2 * g_coarse.ny)
        g_fine = Field2D<T>(2 * g_coarse.nx, 2 * g_coarse.ny);
    for (index_t y = 0; y < g_coarse.ny; ++y)
        for (index_t x = 0; x < g_coarse.nx; ++x) {
            const T v = static_cast<T>(0.25) * g_coarse.at(x, y);
            g_fine.at(2 * x, 2 * y) = v;
            g_fine.at(2 * x + 1, 2 * y) = v;
            g_fine.at(2 * x, 2 * y + 1) = v;
            g_fine.at(2 * x + 1, 2 * y + 1) = v;
        }
}

/// Gradient of upsample2: sum each 2x2 block.
template <typename T>
void upsample2_backward(const Field2D<T>& g_fine, Field2D<T>& g_coarse) {
    require(g_fine.nx % 2 == 0 && g_fine.ny % 2 == 0, "upsample2_backward: dims must be even");
    if (g_coarse.nx != g_fine.nx / 2 || g_coarse.ny != g_fine.ny / 2)
        g_coarse = Field2D<T>(g_fine.nx / 2, g_fine.ny / 2);
    for (index_t y = 0; y < g_coarse.ny; ++y)
        for (index_t x = 0; x < g_coarse.nx; ++x)
            g_coarse.at(x, y) = g_fine.at(2 * x, 2 * y) + g_fine.at(2 * x + 1, 2 * y) +
                                g_fine.at(2 * x, 2 * y + 1) + g_fine.at(2 * x + 1, 2 * y + 1);
}

// ---------------------------------------------------------------------------
// Serial reference twins (plain loops, no pragmas).
// ---------------------------------------------------------------------------
namespace ref {

template <typename T>
void build_kernels(const ConvParams<T>& p, const PaddedImage<T>& I, KernelPlanes<T>& K) {
    if (K.nx != I.nx || K.ny != I.ny) K = KernelPlanes<T>(I.nx, I.ny);
    for (index_t y = 0; y < I.ny; ++y)
        for (index_t x = 0; x < I.nx; ++x)
            for (int s = 0; s < kSlots; ++s) {
                T acc = p.B[static_cast<std::size_t>(s)];
                for (int c = 0; c < 3; ++c)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dxo = -1; dxo <= 1; ++dxo)
                            acc += p.W[static_cast<std::size_t>(conv_w_index(s, c, dy, dxo))] *
                                   I.at(c, x + dxo, y + dy);
                K.at(x, y)[s] = acc;
            }
}

template <typename T>
void apply_kernels(const KernelPlanes<T>& K, const PaddedField<T>& xp, Field2D<T>& y) {
    if (y.nx != K.nx || y.ny != K.ny) y = Field2D<T>(K.nx, K.ny);
    for (index_t j = 0; j < K.ny; ++j)
        for (index_t i = 0; i < K.nx; ++i) {
            T acc = T(0);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dxo = -1; dxo <= 1; ++dxo)
                    acc += K.at(i, j)[slot_index(dy, dxo)] * xp.at(i + dxo, j + dy);
            y.at(i, j) = acc;
        }
}

template <typename T>
void conv_input_grad(const KernelPlanes<T>& K, const PaddedField<T>& gp, Field2D<T>& dx) {
    if (dx.nx != K.nx || dx.ny != K.ny) dx = Field2D<T>(K.nx, K.ny);
    for (index_t q = 0; q < K.ny; ++q)
        for (index_t p = 0; p < K.nx; ++p) {
            T acc = T(0);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dxo = -1; dxo <= 1; ++dxo)
                    acc += K.at(p - dxo, q - dy)[slot_index(dy, dxo)] * gp.at(p - dxo, q - dy);
            dx.at(p, q) = acc;
        }
}

template <typename T>
void accumulate_slot_products(const Field2D<T>& g, const PaddedField<T>& xp, KernelPlanes<T>& S) {
    if (S.nx != g.nx || S.ny != g.ny) S = KernelPlanes<T>(g.nx, g.ny);
    for (index_t j = 0; j < g.ny; ++j)
        for (index_t i = 0; i < g.nx; ++i)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dxo = -1; dxo <= 1; ++dxo)
                    S.at(i, j)[slot_index(dy, dxo)] += g.at(i, j) * xp.at(i + dxo, j + dy);
}

template <typename T>
void conv_param_grads(const KernelPlanes<T>& S, const PaddedImage<T>& I, ConvParams<T>& grad) {
    for (int s = 0; s < kSlots; ++s) {
        T db = T(0);
        T dw[27];
        for (int t = 0; t < 27; ++t) dw[t] = T(0);
        for (index_t y = 0; y < I.ny; ++y)
            for (index_t x = 0; x < I.nx; ++x) {
                const T sv = S.at(x, y)[s];
                if (sv == T(0)) continue;
                db += sv;
                for (int c = 0; c < 3; ++c)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dxo = -1; dxo <= 1; ++dxo)
                            dw[(c * 3 + (dy + 1)) * 3 + (dxo + 1)] += sv * I.at(c, x + dxo, y + dy);
            }
        grad.B[static_cast<std::size_t>(s)] += db;
        for (int t = 0; t < 27; ++t) grad.W[static_cast<std::size_t>(s * 27 + t)] += dw[t];
    }
}

}  // namespace ref

}  // namespace npsd::net
