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

// Batch-quality metrics: uncertainty, diversity and representativeness of an
// annotation batch, measured in the representation space of a reference model.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "alvinlab/datasets.hpp"
#include "alvinlab/model.hpp"
#include "alvinlab/numkit.hpp"

namespace alvinlab {

struct BatchReport {
    double uncertainty = 0.0;
    // +inf when the batch reaches every pool point at distance 0.
    double diversity = 0.0;
    bool diversity_degenerate = false;
    double representativeness = 0.0;
    std::size_t batch_size = 0;
    std::size_t round = 0;
};

// Mean predictive entropy of the batch under `ref_params`.
double batch_uncertainty(const ModelParams& ref_params, std::span<const Example> batch);

struct Diversity {
    double value = 0.0;
    bool degenerate = false;
};

// Inverse of the mean, over pool points, of the Euclidean distance to the nearest batch point.
Diversity batch_diversity(const numkit::RowMatrix& batch_reps, const numkit::RowMatrix& pool_reps);
Diversity batch_diversity(std::span<const Example> batch, std::span<const Example> pool, const ModelParams& params);

// Mean cosine similarity between `x` and its k nearest (Euclidean) pool rows; k is clamped
// to the number of eligible rows. `skip_row` excludes one pool row, e.g. x itself.
double representativeness(std::span<const double> x, const numkit::RowMatrix& pool_reps, std::size_t k = 10,
                          std::optional<std::size_t> skip_row = std::nullopt);
double representativeness(const Example& x, std::span<const Example> pool, const ModelParams& params,
                          std::size_t k = 10);

/// All three metrics for one batch drawn from `pool_ids` (the unlabeled pool before annotation).
/// Representativeness excludes each batch point from its own neighbourhood.
BatchReport make_batch_report(const ModelParams& ref_params, std::span<const ExampleId> batch_ids,
                              std::span<const ExampleId> pool_ids, const DatasetSplit& train, std::size_t round,
                              std::size_t representativeness_k = 10);

}  // namespace alvinlab
