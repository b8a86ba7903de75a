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

// Types shared by every acquisition strategy.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "alvinlab/datasets.hpp"
#include "alvinlab/model.hpp"
#include "alvinlab/numkit.hpp"

namespace alvinlab {

/// Ordered ids chosen in one round.
struct AcquisitionBatch {
    std::vector<ExampleId> ids;
    // Predictive entropy of each id under the round model.
    std::vector<double> entropy;
    // Number of anchors whose neighbourhood contained the id; 0 for anchor-free strategies.
    std::vector<std::size_t> attraction;
    // True when an anchor-based strategy had no anchors and fell back to uncertainty.
    bool fallback = false;
    double seconds = 0.0;

    std::size_t size() const noexcept { return ids.size(); }
};

/// The unlabeled pool as seen by one model: ascending ids with their
/// representations, class probabilities and predictive entropies.
struct PoolView {
    std::vector<ExampleId> ids;
    numkit::RowMatrix reps;
    numkit::RowMatrix probs;
    std::vector<double> entropy;

    std::size_t size() const noexcept { return ids.size(); }
    // Row of `id`, or size() if absent.
    std::size_t row_of(ExampleId id) const;
};

PoolView make_pool_view(const ModelParams& params, std::span<const ExampleId> ids, const DatasetSplit& split);
PoolView make_pool_view(const ModelParams& params, const PoolState& pool, const DatasetSplit& train);

// Pool rows ordered by entropy descending, ties by ascending id.
std::vector<std::size_t> rank_by_entropy(const PoolView& view);

// Appends the highest-entropy ids not yet in `batch` until it holds `b` ids.
void top_up_by_entropy(AcquisitionBatch& batch, const PoolView& view, std::size_t b);

// Fills entropy (and zero attraction where missing) for every id from the view.
void annotate_entropy(AcquisitionBatch& batch, const PoolView& view);

// CSV rows "round,id,entropy,attracting_anchor_count"; the header is written when `header` is set.
void write_batch_csv(std::ostream& out, std::size_t round, const AcquisitionBatch& batch, bool header);

}  // namespace alvinlab
