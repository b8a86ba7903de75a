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

#include "alvinlab/alvin.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "alvinlab/error.hpp"

namespace alvinlab {

void AlvinConfig::validate() const {
    if (anchors_per_pair < 1 || pair_sample < 1 || knn_k < 1 || batch_size < 1) {
        throw UsageError("ALVIN counts (K, m, knn_k, b) must all be >= 1");
    }
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw UsageError("ALVIN Beta shapes must be positive");
    }
    if (fixed_lambda && !(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0)) {
        throw UsageError("fixed lambda must lie in [0, 1]");
    }
}

namespace {

numkit::Vector interpolate(std::span<const double> minority, std::span<const double> majority, double lambda) {
    std::vector<double> z(minority.size());
    const double mu = 1.0 - lambda;
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = lambda * minority[i] + mu * majority[i];
    }
    return numkit::Vector::unchecked(std::move(z));
}

std::vector<ExampleId> sample_ids(const std::vector<ExampleId>& from, std::size_t k, numkit::Rng& rng) {
    std::vector<ExampleId> out;
    for (std::size_t idx : numkit::sample_without_replacement(from.size(), k, rng)) {
        out.push_back(from[idx]);
    }
    return out;
}

}  // namespace

std::vector<Anchor> create_anchors(const ModelParams& params, std::span<const Example> labeled,
                                   const DynamicsVerdict& verdict, const AlvinConfig& cfg, numkit::Rng& rng) {
    cfg.validate();
    const std::size_t C = params.num_classes();

    std::vector<const Example*> sorted;
    sorted.reserve(labeled.size());
    for (const Example& e : labeled) {
        sorted.push_back(&e);
    }
    std::sort(sorted.begin(), sorted.end(), [](const Example* a, const Example* b) { return a->id < b->id; });

    std::unordered_map<ExampleId, numkit::Vector> reps;
    std::vector<std::vector<ExampleId>> minority(C), majority(C), members(C);
    for (const Example* e : sorted) {
        if (e->label >= C) {
            throw UsageError("labeled example outside the model's class range");
        }
        reps.emplace(e->id, encode(params, e->features));
        members[e->label].push_back(e->id);
        if (cfg.pairing == AnchorPairing::random_pairs) {
            continue;
        }
        auto it = verdict.find(e->id);
        if (it == verdict.end()) {
            throw UsageError("no dynamics verdict for labeled id " + std::to_string(e->id));
        }
        (it->second == Group::minority ? minority : majority)[e->label].push_back(e->id);
    }

    std::vector<Anchor> anchors;
    auto emit = [&](ExampleId first, ExampleId second, ClassLabel c) {
        const auto& a = reps.at(first);
        const auto& b = reps.at(second);
        for (std::size_t k = 0; k < cfg.anchors_per_pair; ++k) {
            const double lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : numkit::sample_beta(rng, cfg.alpha, cfg.beta);
            anchors.push_back(Anchor{interpolate(a, b, lambda), first, second, lambda, c});
        }
    };

    for (ClassLabel c = 0; c < C; ++c) {
        switch (cfg.pairing) {
            case AnchorPairing::sampled_partner: {
                if (minority[c].empty() || majority[c].empty()) {
                    break;
                }
                const auto mins = sample_ids(minority[c], std::min(cfg.pair_sample, minority[c].size()), rng);
                const auto majs = sample_ids(majority[c], std::min(cfg.pair_sample, majority[c].size()), rng);
                for (ExampleId i : mins) {
                    emit(i, majs[rng.uniform_index(majs.size())], c);
                }
                break;
            }
            case AnchorPairing::all_pairs: {
                if (minority[c].empty() || majority[c].empty()) {
                    break;
                }
                const std::size_t n_min = cfg.cap_all_pairs ? std::min(cfg.pair_sample, minority[c].size())
                                                            : minority[c].size();
                const std::size_t n_maj = cfg.cap_all_pairs ? std::min(cfg.pair_sample, majority[c].size())
                                                            : majority[c].size();
                const auto mins = sample_ids(minority[c], n_min, rng);
                const auto majs = sample_ids(majority[c], n_maj, rng);
                for (ExampleId i : mins) {
                    for (ExampleId j : majs) {
                        emit(i, j, c);
                    }
                }
                break;
            }
            case AnchorPairing::random_pairs: {
                const auto& all = members[c];
                if (all.size() < 2) {
                    break;
                }
                const auto firsts = sample_ids(all, std::min(cfg.pair_sample, all.size()), rng);
                for (ExampleId i : firsts) {
                    ExampleId j = i;
                    while (j == i) {
                        j = all[rng.uniform_index(all.size())];
                    }
                    emit(i, j, c);
                }
                break;
            }
        }
    }
    return anchors;
}

CandidateSet gather_candidates(std::span<const Anchor> anchors, const PoolView& pool, std::size_t knn_k) {
    if (pool.size() == 0) {
        throw UsageError("cannot gather candidates from an empty pool");
    }
    const std::size_t k = std::min(knn_k, pool.size());
    CandidateSet out;
    if (k == 0) {
        return out;
    }
    std::vector<std::pair<double, ExampleId>> dist(pool.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const auto z = anchors[a].z.span();
        if (z.size() != pool.reps.cols) {
            throw UsageError("anchor dimension does not match pool representations");
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            dist[i] = {numkit::squared_distance(z, pool.reps.row(i)), pool.ids[i]};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t j = 0; j < k; ++j) {
            out.attracted_by[dist[j].second].push_back(a);
        }
    }
    return out;
}

AcquisitionBatch select_batch(const CandidateSet& candidates, const PoolView& pool, std::size_t b) {
    if (b < 1) {
        throw UsageError("batch size must be >= 1");
    }
    if (pool.size() == 0) {
        throw UsageError("cannot select from an empty unlabeled pool");
    }
    struct Ranked {
        double entropy;
        ExampleId id;
        std::size_t attraction;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(candidates.size());
    for (const auto& [id, anchors] : candidates.attracted_by) {
        const std::size_t row = pool.row_of(id);
        if (row == pool.size()) {
            throw UsageError("candidate id " + std::to_string(id) + " is not in the unlabeled pool");
        }
        ranked.push_back({pool.entropy[row], id, anchors.size()});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
        if (x.entropy != y.entropy) {
            return x.entropy > y.entropy;
        }
        return x.id < y.id;
    });

    AcquisitionBatch batch;
    const std::size_t take = std::min(b, ranked.size());
    for (std::size_t i = 0; i < take; ++i) {
        batch.ids.push_back(ranked[i].id);
        batch.attraction.push_back(ranked[i].attraction);
    }
    top_up_by_entropy(batch, pool, std::min(b, pool.size()));
    annotate_entropy(batch, pool);
    return batch;
}

AcquisitionBatch alvin_select(const AlvinRound& round, const PoolView& view, const AlvinConfig& cfg,
                              numkit::Rng& rng) {
    cfg.validate();
    if (view.size() == 0) {
        throw UsageError("cannot select from an empty unlabeled pool");
    }
    const std::size_t b = std::min(cfg.batch_size, view.size());
    const auto labeled = labeled_examples(round.pool, round.train);
    DynamicsVerdict verdict;
    if (cfg.pairing != AnchorPairing::random_pairs) {
        verdict = infer_min_maj(round.trace);
    }
    const auto anchors = create_anchors(round.params, labeled, verdict, cfg, rng);
    if (anchors.empty()) {
        AcquisitionBatch batch;
        top_up_by_entropy(batch, view, b);
        annotate_entropy(batch, view);
        batch.fallback = true;
        return batch;
    }
    const auto candidates = gather_candidates(anchors, view, cfg.knn_k);
    return select_batch(candidates, view, b);
}

AcquisitionBatch alvin_select(const AlvinRound& round, const AlvinConfig& cfg, numkit::Rng& rng) {
    const PoolView view = make_pool_view(round.params, round.pool, round.train);
    return alvin_select(round, view, cfg, rng);
}

}  // namespace alvinlab
