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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "alvinlab/alvin.hpp"
#include "alvinlab/datasets.hpp"
#include "alvinlab/model.hpp"
#include "alvinlab/numkit.hpp"
#include "alvinlab/selection.hpp"

namespace alvinlab {

enum class StrategyId {
    random,
    uncertainty,
    badge,
    embed_kmeans,
    cal,
    alfa_mix,
    alvin,
    alvin_ran,
    alvin_int_all,
    alvin_uni,
    alvin_kmean,
};

inline constexpr std::array<StrategyId, 11> kAllStrategies = {
    StrategyId::random,    StrategyId::uncertainty, StrategyId::badge,         StrategyId::embed_kmeans,
    StrategyId::cal,       StrategyId::alfa_mix,    StrategyId::alvin,         StrategyId::alvin_ran,
    StrategyId::alvin_int_all, StrategyId::alvin_uni, StrategyId::alvin_kmean,
};

std::string_view to_string(StrategyId s) noexcept;
StrategyId parse_strategy(std::string_view s);

struct BaselineConfig {
    std::size_t cal_neighbor_k = 10;
    std::vector<double> alfa_mix_grid = {0.1, 0.2, 0.3};
    std::size_t kmeans_max_iters = 100;

    void validate() const;
};

AcquisitionBatch select_random(const PoolState& pool, std::size_t b, numkit::Rng& rng);
AcquisitionBatch select_uncertainty(const PoolView& view, std::size_t b);
AcquisitionBatch select_badge(const ModelParams& params, const PoolView& view, const DatasetSplit& train,
                              std::size_t b, numkit::Rng& rng);
AcquisitionBatch select_embed_kmeans(const PoolView& view, std::size_t b, std::size_t max_iters, numkit::Rng& rng);

// Mean KL(p_neighbour || p_x) over the neighbor_k nearest labeled representations, one score per pool row.
std::vector<double> cal_scores(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                               std::size_t neighbor_k);
AcquisitionBatch select_cal(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                            std::size_t b, std::size_t neighbor_k);

// Per pool row: does mixing its representation with some class anchor flip the anchor's prediction?
std::vector<bool> alfa_mix_candidates(const ModelParams& params, std::span<const Example> labeled,
                                      const PoolView& view, std::span<const double> grid);
AcquisitionBatch select_alfa_mix(const ModelParams& params, std::span<const Example> labeled, const PoolView& view,
                                 std::size_t b, std::span<const double> grid, std::size_t max_iters,
                                 numkit::Rng& rng);

/// Everything a strategy may consult in one round.
struct RoundInputs {
    const ModelParams& params;
    const DatasetSplit& train;
    const PoolState& pool;
    // Needed by the verdict-driven ALVIN strategies only.
    const PredictionTrace* trace = nullptr;
    std::size_t batch_size = 50;
    AlvinConfig alvin{};
    BaselineConfig baselines{};
};

AcquisitionBatch select_alvin_variant(StrategyId variant, const RoundInputs& in, const PoolView& view,
                                      numkit::Rng& rng);

/// Uniform entry point: runs `strategy`, fills per-id entropy, and records the
/// wall-clock time of the selection itself in `seconds`.
AcquisitionBatch select(StrategyId strategy, const RoundInputs& in, numkit::Rng& rng);

}  // namespace alvinlab
