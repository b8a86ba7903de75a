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

#include "alvinlab/dynamics.hpp"

#include <ostream>
#include <string>

#include "alvinlab/error.hpp"

namespace alvinlab {

Group classify_trace(std::span<const std::uint8_t> correct) {
    if (correct.empty()) {
        throw UsageError("prediction trace has no epochs");
    }
    bool ever_correct = false;
    for (std::size_t t = 0; t < correct.size(); ++t) {
        if (correct[t]) {
            ever_correct = true;
        } else if (t > 0 && correct[t - 1]) {
            return Group::minority;  // forgetting event
        }
    }
    return ever_correct ? Group::majority : Group::minority;
}

DynamicsVerdict infer_min_maj(const PredictionTrace& trace) {
    if (trace.rows.empty() || trace.epochs == 0) {
        throw UsageError("cannot infer groups from an empty trace");
    }
    DynamicsVerdict verdict;
    for (const auto& row : trace.rows) {
        if (row.correct.size() != trace.epochs) {
            throw UsageError("trace row for id " + std::to_string(row.id) + " has the wrong length");
        }
        verdict.emplace(row.id, classify_trace(row.correct));
    }
    return verdict;
}

double minority_recall(const DynamicsVerdict& verdict, const std::map<ExampleId, Group>& truth) {
    std::size_t true_min = 0;
    std::size_t hits = 0;
    for (const auto& [id, predicted] : verdict) {
        auto it = truth.find(id);
        if (it == truth.end() || it->second == Group::unknown) {
            throw UsageError("no ground-truth group for id " + std::to_string(id));
        }
        if (it->second == Group::minority) {
            ++true_min;
            if (predicted == Group::minority) {
                ++hits;
            }
        }
    }
    return true_min == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(true_min);
}

std::map<ExampleId, Group> group_tags(std::span<const Example> examples) {
    std::map<ExampleId, Group> tags;
    for (const Example& e : examples) {
        tags.emplace(e.id, e.group);
    }
    return tags;
}

void write_verdict_csv(std::ostream& out, const DynamicsVerdict& verdict) {
    out << "id,verdict\n";
    for (const auto& [id, g] : verdict) {
        out << id << ',' << to_string(g) << '\n';
    }
}

}  // namespace alvinlab
