// Copyright (C) 2026 The alvinlab Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include "alvinlab/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>

#include "alvinlab/dynamics.hpp"
#include "alvinlab/error.hpp"

namespace alvinlab {

namespace {

struct StrategyName {
    StrategyId id;
    std::string_view name;
};

constexpr StrategyName kNames[] = {
    {StrategyId::random, "random"},
    {StrategyId::uncertainty, "uncertainty"},
    {StrategyId::badge, "badge"},
    {StrategyId::embed_kmeans, "embed_kmeans"},
    {StrategyId::cal, "cal"},
    {StrategyId::alfa_mix, "alfa_mix"},
    {StrategyId::alvin, "alvin"},
    {StrategyId::alvin_ran, "alvin_ran"},
    {StrategyId::alvin_int_all, "alvin_int_all"},
    {StrategyId::alvin_uni, "alvin_uni"},
    {StrategyId::alvin_kmean, "alvin_kmean"},
};

void require_batch(std::size_t b, std::size_t available) {
    if (b < 1) {
        throw UsageError("batch size must be >= 1");
    }
    if (b > available) {
        throw UsageError("batch size " + std::to_string(b) + " exceeds " + std::to_string(available) +
                         " unlabeled examples");
    }
}

// Pool rows of `rows`, as a matrix.
numkit::RowMatrix gather_rows(const numkit::RowMatrix& m, std::span<const std::size_t> rows) {
    numkit::RowMatrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = m.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// k-means++ seeded Lloyd over the given pool rows; returns the chosen pool rows.
std::vector<std::size_t> cluster_and_pick(const PoolView& view, std::span<const std::size_t> rows, std::size_t k,
                                          std::size_t max_iters, numkit::Rng& rng) {
    const auto points = gather_rows(view.reps, rows);
    const auto init = numkit::kmeans_pp_init(points, k, rng);
    const auto km = numkit::lloyd_kmeans(points, k, init, max_iters);
    std::vector<std::size_t> picked;
    for (std::size_t local : numkit::closest_to_centroids(points, km.centroids)) {
        picked.push_back(rows[local]);
    }
    return picked;
}

AcquisitionBatch from_rows(const PoolView& view, std::span<const std::size_t> rows) {
    AcquisitionBatch batch;
    for (std::size_t r : rows) {
        batch.ids.push_back(view.ids[r]);
    }
    return batch;
}

}  // namespace

std::string_view to_string(StrategyId s) noexcept {
    for (const auto& n : kNames) {
        if (n.id == s) {
            return n.name;
        }
    }
    return "unknown";
}

StrategyId parse_strategy(std::string_view s) {
    for (const auto& n : kNames) {
        if (n.name == s) {
            return n.id;
        }
    }
    throw UsageError("unknown strategy '" + std::string(s) + "'");
}

void BaselineConfig::validate() const {
    if (cal_neighbor_k < 1) throw UsageError("cal_neighbor_k must be >= 1");
    if (alfa_mix_grid.empty()) throw UsageError("alfa_mix_grid must be non-empty");
    for (double l : alfa_mix_grid) {
        if (!(l >= 0.0 && l <= 1.0)) throw UsageError("alfa_mix_grid values must lie in [0, 1]");
    }
    if (kmeans_max_iters < 1) throw UsageError("kmeans_max_iters must be >= 1");
}

AcquisitionBatch select_random(const PoolState& pool, std::size_t b, numkit::Rng& rng) {
    require_batch(b, pool.unlabeled.size());
    const std::vector<ExampleId> ids(pool.unlabeled.begin(), pool.unlabeled.end());
    AcquisitionBatch batch;
    for (std::size_t idx : numkit::sample_without_replacement(ids.size(), b, rng)) {
        batch.ids.push_back(ids[idx]);
    }
    return batch;
}

AcquisitionBatch select_uncertainty(const PoolView& view, std::size_t b) {
    require_batch(b, view.size());
    AcquisitionBatch batch;
    top_up_by_entropy(batch, view, b);
    return batch;
}

AcquisitionBatch select_badge(const ModelParams& params, const PoolView& view, const DatasetSplit& train,
                              std::size_t b, numkit::Rng& rng) {
    require_batch(b, view.size());
    numkit::RowMatrix grads(view.size(), params.num_classes() * params.hidden_dim());
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto g = gradient_embedding(params, train.at(view.ids[i]).features);
        std::copy(g.begin(), g.end(), grads.row(i).begin());
    }
    return from_rows(view, numkit::kmeans_pp_init(grads, b, rng));
}

AcquisitionBatch select_embed_kmeans(const PoolView& view, std::size_t b, std::size_t max_iters, numkit::Rng& rng) {
    require_batch(b, view.size());
    std::vector<std::size_t> rows(view.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return from_rows(view, cluster_and_pick(view, rows, b, max_iters, rng));
}

std::vector<double> cal_scores(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                               std::size_t neighbor_k) {
    if (labeled.empty()) {
        throw UsageError("CAL needs a non-empty labeled set");
    }
    if (neighbor_k < 1) {
        throw UsageError("CAL neighbor_k must be >= 1");
    }
    const std::size_t k = std::min(neighbor_k, labeled.size());
    struct Labeled {
        ExampleId id;
        numkit::Vector z;
        std::vector<double> p;
    };
    std::vector<Labeled> refs;
    refs.reserve(labeled.size());
    for (const Example& e : labeled) {
        auto z = encode(params, e.features);
        auto p = predict_proba_from_representation(params, z);
        refs.push_back({e.id, std::move(z), std::move(p)});
    }

    std::vector<double> scores(view.size());
    std::vector<std::pair<double, ExampleId>> dist(refs.size());
    std::unordered_map<ExampleId, std::size_t> pos;
    for (std::size_t j = 0; j < refs.size(); ++j) {
        pos.emplace(refs[j].id, j);
    }
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto z = view.reps.row(i);
        for (std::size_t j = 0; j < refs.size(); ++j) {
            dist[j] = {numkit::squared_distance(z, refs[j].z), refs[j].id};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double total = 0.0;
        for (std::size_t n = 0; n < k; ++n) {
            total += numkit::kl_divergence(refs[pos.at(dist[n].second)].p, view.probs.row(i));
        }
        scores[i] = total / static_cast<double>(k);
    }
    return scores;
}

AcquisitionBatch select_cal(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                            std::size_t b, std::size_t neighbor_k) {
    require_batch(b, view.size());
    const auto scores = cal_scores(params, labeled, view, neighbor_k);
    std::vector<std::size_t> order(view.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b), order.end(),
                      [&](std::size_t a, std::size_t c) {
                          if (scores[a] != scores[c]) {
                              return scores[a] > scores[c];
                          }
                          return view.ids[a] < view.ids[c];
                      });
    order.resize(b);
    return from_rows(view, order);
}

std::vector<bool> alfa_mix_candidates(const ModelParams& params, std::span<const Example> labeled,
                                      const PoolView& view, std::span<const double> grid) {
    const std::size_t C = params.num_classes();
    const std::size_t H = params.hidden_dim();
    numkit::RowMatrix anchors(C, H);
    std::vector<std::size_t> counts(C, 0);
    for (const Example& e : labeled) {
        const auto z = encode(params, e.features);
        auto row = anchors.row(e.label);
        for (std::size_t h = 0; h < H; ++h) {
            row[h] += z[h];
        }
        ++counts[e.label];
    }
    std::vector<ClassLabel> anchor_pred(C);
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] == 0) {
            throw UsageError("ALFA-Mix needs at least one labeled example per class (class " + std::to_string(c) +
                             " has none)");
        }
        for (double& v : anchors.row(c)) {
            v /= static_cast<double>(counts[c]);
        }
        anchor_pred[c] = numkit::argmax(logits_from_representation(params, anchors.row(c)));
    }

    std::vector<bool> flags(view.size(), false);
    std::vector<double> mix(H);
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto z = view.reps.row(i);
        for (std::size_t c = 0; c < C && !flags[i]; ++c) {
            const auto a = anchors.row(c);
            for (double lambda : grid) {
                for (std::size_t h = 0; h < H; ++h) {
                    mix[h] = lambda * z[h] + (1.0 - lambda) * a[h];
                }
                if (numkit::argmax(logits_from_representation(params, mix)) != anchor_pred[c]) {
                    flags[i] = true;
                    break;
                }
            }
        }
    }
    return flags;
}

AcquisitionBatch select_alfa_mix(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                                 std::size_t b, std::span<const double> grid, std::size_t max_iters,
                                 numkit::Rng& rng) {
    require_batch(b, view.size());
    const auto flags = alfa_mix_candidates(params, labeled, view, grid);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i]) {
            rows.push_back(i);
        }
    }
    AcquisitionBatch batch;
    if (rows.size() > b) {
        batch = from_rows(view, cluster_and_pick(view, rows, b, max_iters, rng));
    } else {
        batch = from_rows(view, rows);
        top_up_by_entropy(batch, view, b);
    }
    return batch;
}

AcquisitionBatch select_alvin_variant(StrategyId variant, const RoundInputs& in, const PoolView& view,
                                      numkit::Rng& rng) {
    require_batch(in.batch_size, view.size());
    AlvinConfig cfg = in.alvin;
    cfg.batch_size = in.batch_size;
    switch (variant) {
        case StrategyId::alvin:
        case StrategyId::alvin_uni:
        case StrategyId::alvin_kmean:
            cfg.pairing = AnchorPairing::sampled_partner;
            break;
        case StrategyId::alvin_ran:
            cfg.pairing = AnchorPairing::random_pairs;
            break;
        case StrategyId::alvin_int_all:
            cfg.pairing = AnchorPairing::all_pairs;
            break;
        default:
            throw UsageError("not an ALVIN variant: " + std::string(to_string(variant)));
    }
    if (cfg.pairing != AnchorPairing::random_pairs && in.trace == nullptr) {
        throw UsageError(std::string(to_string(variant)) + " needs the round's prediction trace");
    }

    static const PredictionTrace kNoTrace;
    const AlvinRound round{in.params, in.train, in.pool, in.trace ? *in.trace : kNoTrace};
    if (variant != StrategyId::alvin_uni && variant != StrategyId::alvin_kmean) {
        return alvin_select(round, view, cfg, rng);
    }

    const auto labeled = labeled_examples(in.pool, in.train);
    const auto anchors = create_anchors(in.params, labeled, infer_min_maj(*in.trace), cfg, rng);
    if (anchors.empty()) {
        AcquisitionBatch batch = select_uncertainty(view, in.batch_size);
        batch.fallback = true;
        return batch;
    }
    const auto candidates = gather_candidates(anchors, view, cfg.knn_k);
    std::vector<std::size_t> rows;
    for (const auto& [id, _] : candidates.attracted_by) {
        rows.push_back(view.row_of(id));
    }

    AcquisitionBatch batch;
    if (rows.size() <= in.batch_size) {
        batch = from_rows(view, rows);
    } else if (variant == StrategyId::alvin_uni) {
        for (std::size_t idx : numkit::sample_without_replacement(rows.size(), in.batch_size, rng)) {
            batch.ids.push_back(view.ids[rows[idx]]);
        }
    } else {
        batch = from_rows(view, cluster_and_pick(view, rows, in.batch_size, in.baselines.kmeans_max_iters, rng));
    }
    for (ExampleId id : batch.ids) {
        batch.attraction.push_back(candidates.attracted_by.at(id).size());
    }
    top_up_by_entropy(batch, view, in.batch_size);
    return batch;
}

AcquisitionBatch select(StrategyId strategy, const RoundInputs& in, numkit::Rng& rng) {
    in.baselines.validate();
    const auto start = std::chrono::steady_clock::now();
    AcquisitionBatch batch;
    std::optional<PoolView> view;
    if (strategy == StrategyId::random) {
        batch = select_random(in.pool, in.batch_size, rng);
    } else {
        view = make_pool_view(in.params, in.pool, in.train);
        switch (strategy) {
            case StrategyId::uncertainty:
                batch = select_uncertainty(*view, in.batch_size);
                break;
            case StrategyId::badge:
                batch = select_badge(in.params, *view, in.train, in.batch_size, rng);
                break;
            case StrategyId::embed_kmeans:
                batch = select_embed_kmeans(*view, in.batch_size, in.baselines.kmeans_max_iters, rng);
                break;
            case StrategyId::cal:
                batch = select_cal(in.params, labeled_examples(in.pool, in.train), *view, in.batch_size,
                                   in.baselines.cal_neighbor_k);
                break;
            case StrategyId::alfa_mix:
                batch = select_alfa_mix(in.params, labeled_examples(in.pool, in.train), *view, in.batch_size,
                                        in.baselines.alfa_mix_grid, in.baselines.kmeans_max_iters, rng);
                break;
            default:
                batch = select_alvin_variant(strategy, in, *view, rng);
                break;
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    batch.seconds = std::chrono::duration<double>(stop - start).count();

    if (!view) {
        view = make_pool_view(in.params, in.pool, in.train);
    }
    annotate_entropy(batch, *view);
    return batch;
}

}  // namespace alvinlab
