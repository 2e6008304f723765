#pragma once

#include <limits>

#include "npsd/net/backward.hpp"
#include "npsd/net/params.hpp"
#include "npsd/train/dataset.hpp"

namespace npsd {

struct TrainConfig {
    int depth = 3;
    index_t batch_size = 128;
    int repeats_per_matrix = 5;
    int max_epochs = 50;
    int val_every = 5;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    double divergence_factor = 1e6;
};

struct TrainLogRow {
    int epoch = 0;
    double mean_train_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
    double wall_seconds = 0.0;
};

struct TrainResult {
    net::NetParams params;  // best-validation parameters
    std::vector<TrainLogRow> log;
    bool diverged = false;
    int best_epoch = -1;
    double best_val = std::numeric_limits<double>::infinity();
};

/// Residual-norm loss ||b - A P(I, b)||_2 for one right-hand side, computed
/// in f64 around the T-precision network apply.
template <typename T>
double loss_one(const net::NetContext<T>& ctx, const SparseMatrix& A, const ReductionMap& map,
                const Vector& b);

double loss(const net::NetParams& params, const IndicatorImage& I, const SparseMatrix& A,
            const ReductionMap& map, const Vector& b);

/// Mean batch loss and its gradient w.r.t. every parameter tensor. Gradient
/// of ||v|| uses v/||v|| with gradient 0 below 1e-30. Throws on non-finite
/// loss, naming the offending batch index.
template <typename T>
std::pair<double, net::NetParamsT<T>> backward_batch(const net::NetParamsT<T>& params,
                                                     const IndicatorImage& I,
                                                     const SparseMatrix& A,
                                                     const ReductionMap& map,
                                                     const std::vector<const Vector*>& batch);

/// Shuffled-matrix training loop with adaptive-moment updates and periodic
/// validation; returns the best-validation parameters. Single-threaded
/// deterministic for a fixed seed.
TrainResult train(const TrainConfig& cfg, const RhsDataset& train_set, const RhsDataset& val_set);

/// CSV: epoch,mean_train_loss,val_loss,wall_seconds.
void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path);

// --- template implementations ---------------------------------------------

template <typename T>
double loss_one(const net::NetContext<T>& ctx, const SparseMatrix& A, const ReductionMap& map,
                const Vector& b) {
    require(static_cast<index_t>(b.size()) == A.n_rows, "loss: rhs length mismatch");
    require(map.reduced_size() == A.n_rows, "loss: map/matrix mismatch");

    Field2D<T> full(ctx.nx, ctx.ny);
    for (std::size_t k = 0; k < b.size(); ++k)
        full.data[static_cast<std::size_t>(map.fluid_indices[k])] = static_cast<T>(b[k]);
    const Field2D<T> out = ctx.apply(full);

    Vector d(b.size());
    for (std::size_t k = 0; k < d.size(); ++k)
        d[k] = static_cast<double>(out.data[static_cast<std::size_t>(map.fluid_indices[k])]);

    Vector Ad = spmv(A, d);
    double s = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double v = b[k] - Ad[k];
        s += v * v;
    }
    return std::sqrt(s);
}

template <typename T>
std::pair<double, net::NetParamsT<T>> backward_batch(const net::NetParamsT<T>& params,
                                                     const IndicatorImage& I,
                                                     const SparseMatrix& A,
                                                     const ReductionMap& map,
                                                     const std::vector<const Vector*>& batch) {
    require(!batch.empty(), "backward: empty batch");
    const net::NetContext<T> ctx = net::NetContext<T>::build(params, I);
    net::BatchGrads<T> acc(ctx);
    net::SampleTape<T> tape;

    double loss_sum = 0.0;
    Field2D<T> full(ctx.nx, ctx.ny), g_full(ctx.nx, ctx.ny);
    Vector d, Ad, g_reduced;

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const Vector& b = *batch[s];
        require(static_cast<index_t>(b.size()) == A.n_rows, "backward: rhs length mismatch");

        std::fill(full.data.begin(), full.data.end(), T(0));
        for (std::size_t k = 0; k < b.size(); ++k)
            full.data[static_cast<std::size_t>(map.fluid_indices[k])] = static_cast<T>(b[k]);
        net::forward_tape(ctx, full, tape);

        d.resize(b.size());
        for (std::size_t k = 0; k < d.size(); ++k)
            d[k] = static_cast<double>(tape.out.data[static_cast<std::size_t>(map.fluid_indices[k])]);
        spmv(A, d, Ad);

        double sq = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            const double v = b[k] - Ad[k];
            sq += v * v;
        }
        const double sample_loss = std::sqrt(sq);
        if (!std::isfinite(sample_loss))
            throw std::runtime_error("backward: non-finite loss at batch index " +
                                     std::to_string(s));
        loss_sum += sample_loss;

        std::fill(g_full.data.begin(), g_full.data.end(), T(0));
        if (sample_loss >= 1e-30) {
            // dL/dd = -A (v / ||v||), A symmetric
            g_reduced.resize(b.size());
            for (std::size_t k = 0; k < b.size(); ++k)
                g_reduced[k] = (b[k] - Ad[k]) / sample_loss;
            spmv(A, g_reduced, Ad);  // reuse Ad as scratch
            for (std::size_t k = 0; k < b.size(); ++k)
                g_full.data[static_cast<std::size_t>(map.fluid_indices[k])] =
                    static_cast<T>(-Ad[k]);
        }
        net::backward_sample(ctx, tape, g_full, acc);
    }

    net::NetParamsT<T> grads;
    net::finalize_batch_grads(ctx, acc, grads);
    return {loss_sum / static_cast<double>(batch.size()), std::move(grads)};
}

}  // namespace npsd
