#include "npsd/train/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "npsd/rng.hpp"

namespace npsd {

double loss(const net::NetParams& params, const IndicatorImage& I, const SparseMatrix& A,
            const ReductionMap& map, const Vector& b) {
    const auto ctx = net::NetContext<float>::build(params, I);
    return loss_one(ctx, A, map, b);
}

namespace {

struct AdamState {
    net::NetParams m, v;
    index_t step = 0;
};

void adam_update(net::NetParams& params, const net::NetParams& grads, AdamState& st,
                 const TrainConfig& cfg) {
    st.step += 1;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step));

    std::vector<std::pair<float*, std::size_t>> ps, gs, ms, vs;
    params.for_each_span([&](const float* p, std::size_t n) {
        ps.emplace_back(const_cast<float*>(p), n);
    });
    grads.for_each_span([&](const float* p, std::size_t n) {
        gs.emplace_back(const_cast<float*>(p), n);
    });
    st.m.for_each_span([&](float* p, std::size_t n) { ms.emplace_back(p, n); });
    st.v.for_each_span([&](float* p, std::size_t n) { vs.emplace_back(p, n); });

    for (std::size_t t = 0; t < ps.size(); ++t) {
        float* p = ps[t].first;
        const float* g = gs[t].first;
        float* m = ms[t].first;
        float* v = vs[t].first;
        for (std::size_t i = 0; i < ps[t].second; ++i) {
            const double gi = static_cast<double>(g[i]);
            const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
            const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p[i] = static_cast<float>(static_cast<double>(p[i]) -
                                      cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
}

double validation_loss(const net::NetParams& params, const RhsDataset& val_set) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const DatasetEntry& e : val_set.entries) {
        const auto ctx = net::NetContext<float>::build(params, e.I);
        for (const Vector& b : e.rhs) {
            sum += loss_one(ctx, e.A, e.map, b);
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const RhsDataset& train_set, const RhsDataset& val_set) {
    require(!train_set.entries.empty(), "train: empty dataset");
    require(cfg.batch_size >= 1 && cfg.repeats_per_matrix >= 1 && cfg.max_epochs >= 0,
            "train: counts must be positive");

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult res;
    res.params = net::init_params(cfg.depth, cfg.seed);
    if (cfg.max_epochs == 0) return res;

    AdamState adam;
    adam.m = net::zero_like(res.params);
    adam.v = net::zero_like(res.params);

    Rng shuffle_rng(derive_seed(cfg.seed, 0xA11CE));
    std::vector<std::size_t> order(train_set.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    net::NetParams best_params = res.params;
    double first_epoch_loss = -1.0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Fisher-Yates with our deterministic stream
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (const std::size_t mi : order) {
            const DatasetEntry& e = train_set.entries[mi];
            for (int rep = 0; rep < cfg.repeats_per_matrix; ++rep) {
                for (std::size_t start = 0; start < e.rhs.size();
                     start += static_cast<std::size_t>(cfg.batch_size)) {
                    const std::size_t end =
                        std::min(e.rhs.size(), start + static_cast<std::size_t>(cfg.batch_size));
                    std::vector<const Vector*> batch;
                    batch.reserve(end - start);
                    for (std::size_t s = start; s < end; ++s) batch.push_back(&e.rhs[s]);
                    auto [batch_loss, grads] = backward_batch(res.params, e.I, e.A, e.map, batch);
                    adam_update(res.params, grads, adam, cfg);
                    loss_sum += batch_loss;
                    ++n_batches;
                }
            }
        }
        TrainLogRow row;
        row.epoch = epoch;
        row.mean_train_loss = n_batches ? loss_sum / static_cast<double>(n_batches) : 0.0;

        if (first_epoch_loss < 0.0) first_epoch_loss = row.mean_train_loss;
        if (!std::isfinite(row.mean_train_loss) ||
            row.mean_train_loss > cfg.divergence_factor * std::max(first_epoch_loss, 1e-300)) {
            row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            res.log.push_back(row);
            res.diverged = true;
            return res;
        }

        const bool last = (epoch == cfg.max_epochs);
        if ((cfg.val_every > 0 && epoch % cfg.val_every == 0) || last) {
            row.val_loss = val_set.entries.empty() ? row.mean_train_loss
                                                   : validation_loss(res.params, val_set);
            if (row.val_loss < res.best_val) {
                res.best_val = row.val_loss;
                res.best_epoch = epoch;
                best_params = res.params;
            }
        }
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(row);
    }
    if (res.best_epoch > 0) res.params = std::move(best_params);
    return res;
}

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_train_log_csv: cannot open " + path);
    std::fprintf(f, "epoch,mean_train_loss,val_loss,wall_seconds\n");
    for (const TrainLogRow& r : log) {
        if (std::isnan(r.val_loss))
            std::fprintf(f, "%d,%.17g,,%.3f\n", r.epoch, r.mean_train_loss, r.wall_seconds);
        else
            std::fprintf(f, "%d,%.17g,%.17g,%.3f\n", r.epoch, r.mean_train_loss, r.val_loss,
                         r.wall_seconds);
    }
    std::fclose(f);
}

}  // namespace npsd
