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

#include "alvinlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "alvinlab/error.hpp"

namespace alvinlab {

double batch_uncertainty(const ModelParams& ref_params, std::span<const Example> batch) {
    if (batch.empty()) {
        throw UsageError("batch uncertainty of an empty batch");
    }
    double total = 0.0;
    for (const Example& e : batch) {
        total += numkit::entropy(predict_proba(ref_params, e.features));
    }
    return total / static_cast<double>(batch.size());
}

Diversity batch_diversity(const numkit::RowMatrix& batch_reps, const numkit::RowMatrix& pool_reps) {
    if (batch_reps.rows == 0) {
        throw UsageError("batch diversity of an empty batch");
    }
    if (pool_reps.rows == 0) {
        throw UsageError("batch diversity over an empty pool");
    }
    if (batch_reps.cols != pool_reps.cols) {
        throw UsageError("batch and pool representations differ in dimension");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pool_reps.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < batch_reps.rows; ++j) {
            best = std::min(best, numkit::squared_distance(pool_reps.row(i), batch_reps.row(j)));
        }
        total += std::sqrt(best);
    }
    const double mean = total / static_cast<double>(pool_reps.rows);
    if (mean == 0.0) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {1.0 / mean, false};
}

Diversity batch_diversity(std::span<const Example> batch, std::span<const Example> pool, const ModelParams& params) {
    return batch_diversity(encode_all(params, batch), encode_all(params, pool));
}

double representativeness(std::span<const double> x, const numkit::RowMatrix& pool_reps, std::size_t k,
                          std::optional<std::size_t> skip_row) {
    if (k < 1) {
        throw UsageError("representativeness needs k >= 1");
    }
    if (x.size() != pool_reps.cols) {
        throw UsageError("representation dimension mismatch");
    }
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(pool_reps.rows);
    for (std::size_t i = 0; i < pool_reps.rows; ++i) {
        if (skip_row && *skip_row == i) {
            continue;
        }
        dist.emplace_back(numkit::squared_distance(x, pool_reps.row(i)), i);
    }
    if (dist.empty()) {
        throw UsageError("representativeness needs a non-empty pool");
    }
    const std::size_t kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    double total = 0.0;
    for (std::size_t j = 0; j < kk; ++j) {
        total += numkit::cosine_similarity(x, pool_reps.row(dist[j].second));
    }
    return total / static_cast<double>(kk);
}

double representativeness(const Example& x, std::span<const Example> pool, const ModelParams& params,
                          std::size_t k) {
    const auto z = encode(params, x.features);
    return representativeness(z, encode_all(params, pool), k);
}

BatchReport make_batch_report(const ModelParams& ref_params, std::span<const ExampleId> batch_ids,
                              std::span<const ExampleId> pool_ids, const DatasetSplit& train, std::size_t round,
                              std::size_t representativeness_k) {
    if (batch_ids.empty()) {
        throw UsageError("batch report of an empty batch");
    }
    std::vector<Example> batch;
    std::vector<Example> pool;
    for (ExampleId id : batch_ids) {
        batch.push_back(train.at(id));
    }
    std::unordered_map<ExampleId, std::size_t> pool_row;
    for (ExampleId id : pool_ids) {
        pool_row.emplace(id, pool.size());
        pool.push_back(train.at(id));
    }
    const auto batch_reps = encode_all(ref_params, batch);
    const auto pool_reps = encode_all(ref_params, pool);

    BatchReport report;
    report.round = round;
    report.batch_size = batch.size();
    report.uncertainty = batch_uncertainty(ref_params, batch);
    const auto div = batch_diversity(batch_reps, pool_reps);
    report.diversity = div.value;
    report.diversity_degenerate = div.degenerate;

    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::optional<std::size_t> self;
        if (auto it = pool_row.find(batch[i].id); it != pool_row.end()) {
            self = it->second;
        }
        total += representativeness(batch_reps.row(i), pool_reps, representativeness_k, self);
    }
    report.representativeness = total / static_cast<double>(batch.size());
    return report;
}

}  // namespace alvinlab
