#pragma once

#include "npsd/discretization.hpp"
#include "npsd/net/forward.hpp"
#include "npsd/precond.hpp"

namespace npsd::net {

/// The trained network as a preconditioner over the reduced system: the f64
/// residual is zero-padded to the full grid, cast to f32, run through the
/// hierarchical forward pass, restricted back to fluid cells and cast to
/// f64. The f32/f64 boundary sits exactly at this interface. Linear but not
/// symmetric.
class NeuralPrecond : public Preconditioner {
public:
    NeuralPrecond(const NetParams& params, const IndicatorImage& I, ReductionMap map);

    using Preconditioner::apply;
    void apply(const Vector& r, Vector& z) const override;
    bool is_linear() const override { return true; }
    bool is_symmetric() const override { return false; }
    index_t size() const override { return map_.reduced_size(); }
    std::string name() const override { return "neural"; }

    const NetContext<float>& context() const { return ctx_; }

private:
    NetContext<float> ctx_;
    ReductionMap map_;
};

std::unique_ptr<Preconditioner> neural_precond(const NetParams& params, const IndicatorImage& I,
                                               const ReductionMap& map);

}  // namespace npsd::net
