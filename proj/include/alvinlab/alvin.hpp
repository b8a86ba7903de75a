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

// Anchor-interpolation acquisition.
//
// One round: split the labeled set into minority/majority examples from their
// training dynamics, interpolate minority and majority representations of the
// same class into anchors, collect the unlabeled points nearest to each anchor,
// then annotate the most uncertain of those points.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "alvinlab/datasets.hpp"
#include "alvinlab/dynamics.hpp"
#include "alvinlab/model.hpp"
#include "alvinlab/numkit.hpp"
#include "alvinlab/selection.hpp"

namespace alvinlab {

struct Anchor {
    numkit::Vector z;
    ExampleId minority_id = 0;
    ExampleId majority_id = 0;
    double lambda = 0.0;
    ClassLabel label = 0;
};

// How anchor endpoints are paired within a class.
enum class AnchorPairing {
    sampled_partner,  // one uniformly drawn majority partner per sampled minority example
    all_pairs,        // every sampled minority example with every sampled majority example
    random_pairs,     // verdict-blind: random labeled pairs of the class
};

struct AlvinConfig {
    std::size_t anchors_per_pair = 15;  // K
    double alpha = 2.0;
    double beta = 2.0;
    std::size_t pair_sample = 25;  // m, per class and group
    std::size_t knn_k = 5;
    std::size_t batch_size = 50;  // b
    // Replaces the Beta draw; used to probe the interpolation endpoints.
    std::optional<double> fixed_lambda;
    AnchorPairing pairing = AnchorPairing::sampled_partner;
    // With all_pairs, false lifts the pair_sample cap so every minority meets every majority example.
    bool cap_all_pairs = true;

    void validate() const;
};

/// Unlabeled ids reached by at least one anchor, each with the anchors that reached it.
struct CandidateSet {
    std::map<ExampleId, std::vector<std::size_t>> attracted_by;

    std::size_t size() const noexcept { return attracted_by.size(); }
    bool empty() const noexcept { return attracted_by.empty(); }
};

// Empty result means no class had both a minority and a majority example
// (or, for random_pairs, two labeled examples): the caller must fall back.
std::vector<Anchor> create_anchors(const ModelParams& params, std::span<const Example> labeled,
                                   const DynamicsVerdict& verdict, const AlvinConfig& cfg, numkit::Rng& rng);

// Exact Euclidean k-NN per anchor; distance ties go to the lower id. knn_k is clamped to the pool size.
CandidateSet gather_candidates(std::span<const Anchor> anchors, const PoolView& pool, std::size_t knn_k);

// Candidates by entropy descending (ties: ascending id); short batches are topped up
// from the remaining pool by the same ranking.
AcquisitionBatch select_batch(const CandidateSet& candidates, const PoolView& pool, std::size_t b);

struct AlvinRound {
    const ModelParams& params;
    const DatasetSplit& train;
    const PoolState& pool;
    const PredictionTrace& trace;
};

// Full round. Falls back to uncertainty sampling when create_anchors yields nothing.
AcquisitionBatch alvin_select(const AlvinRound& round, const AlvinConfig& cfg, numkit::Rng& rng);
AcquisitionBatch alvin_select(const AlvinRound& round, const PoolView& view, const AlvinConfig& cfg,
                              numkit::Rng& rng);

}  // namespace alvinlab
