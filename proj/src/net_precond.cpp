#include "npsd/net/precond.hpp"

#include <cmath>

#include "npsd/vector_ops.hpp"

namespace npsd::net {

NeuralPrecond::NeuralPrecond(const NetParams& params, const IndicatorImage& I, ReductionMap map)
    : ctx_(NetContext<float>::build(params, I)), map_(std::move(map)) {
    require(map_.full_size == I.cells(), "NeuralPrecond: map does not match image");
}

void NeuralPrecond::apply(const Vector& r, Vector& z) const {
    require(static_cast<index_t>(r.size()) == map_.reduced_size(),
            "NeuralPrecond::apply: size mismatch");

    // normalize so the f32 network sees well-scaled data, rescale after;
    // exact for a linear operator
    const double rnorm = norm2(r);
    z.assign(r.size(), 0.0);
    if (rnorm == 0.0) return;

    Field2D<float> full(ctx_.nx, ctx_.ny);
    const double inv = 1.0 / rnorm;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const index_t cell = map_.fluid_indices[k];
        full.data[static_cast<std::size_t>(cell)] = static_cast<float>(r[k] * inv);
    }
    const Field2D<float> out = ctx_.apply(full);
    for (std::size_t k = 0; k < z.size(); ++k) {
        const index_t cell = map_.fluid_indices[k];
        z[k] = static_cast<double>(out.data[static_cast<std::size_t>(cell)]) * rnorm;
    }
}

std::unique_ptr<Preconditioner> neural_precond(const NetParams& params, const IndicatorImage& I,
                                               const ReductionMap& map) {
    return std::make_unique<NeuralPrecond>(params, I, map);
}

}  // namespace npsd::net
