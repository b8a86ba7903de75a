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

#include "alvinlab/selection.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <set>

#include "alvinlab/error.hpp"

namespace alvinlab {

std::size_t PoolView::row_of(ExampleId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return (it != ids.end() && *it == id) ? static_cast<std::size_t>(it - ids.begin()) : ids.size();
}

PoolView make_pool_view(const ModelParams& params, std::span<const ExampleId> ids, const DatasetSplit& split) {
    PoolView view;
    view.ids.assign(ids.begin(), ids.end());
    std::sort(view.ids.begin(), view.ids.end());
    const std::size_t n = view.ids.size();
    view.reps = numkit::RowMatrix(n, params.hidden_dim());
    view.probs = numkit::RowMatrix(n, params.num_classes());
    view.entropy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Example& e = split.at(view.ids[i]);
        const auto z = encode(params, e.features);
        std::copy(z.begin(), z.end(), view.reps.row(i).begin());
        const auto p = predict_proba_from_representation(params, z);
        std::copy(p.begin(), p.end(), view.probs.row(i).begin());
        view.entropy[i] = numkit::entropy(p);
    }
    return view;
}

PoolView make_pool_view(const ModelParams& params, const PoolState& pool, const DatasetSplit& train) {
    std::vector<ExampleId> ids(pool.unlabeled.begin(), pool.unlabeled.end());
    return make_pool_view(params, ids, train);
}

std::vector<std::size_t> rank_by_entropy(const PoolView& view) {
    std::vector<std::size_t> order(view.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (view.entropy[a] != view.entropy[b]) {
            return view.entropy[a] > view.entropy[b];
        }
        return view.ids[a] < view.ids[b];
    });
    return order;
}

void top_up_by_entropy(AcquisitionBatch& batch, const PoolView& view, std::size_t b) {
    if (batch.ids.size() >= b) {
        return;
    }
    std::set<ExampleId> have(batch.ids.begin(), batch.ids.end());
    for (std::size_t row : rank_by_entropy(view)) {
        if (batch.ids.size() >= b) {
            break;
        }
        if (!have.contains(view.ids[row])) {
            batch.ids.push_back(view.ids[row]);
            batch.attraction.push_back(0);
        }
    }
}

void annotate_entropy(AcquisitionBatch& batch, const PoolView& view) {
    batch.entropy.resize(batch.ids.size());
    batch.attraction.resize(batch.ids.size(), 0);
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const std::size_t row = view.row_of(batch.ids[i]);
        if (row == view.size()) {
            throw UsageError("batch id " + std::to_string(batch.ids[i]) + " is not in the unlabeled pool");
        }
        batch.entropy[i] = view.entropy[row];
    }
}

void write_batch_csv(std::ostream& out, std::size_t round, const AcquisitionBatch& batch, bool header) {
    if (header) {
        out << "round,id,entropy,attracting_anchor_count\n";
    }
    char buf[64];
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const double h = i < batch.entropy.size() ? batch.entropy[i] : 0.0;
        const auto r = std::to_chars(buf, buf + sizeof(buf), h);
        out << round << ',' << batch.ids[i] << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf))
            << ',' << (i < batch.attraction.size() ? batch.attraction[i] : 0) << '\n';
    }
}

}  // namespace alvinlab
