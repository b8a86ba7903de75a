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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>

#include "alvinlab/datasets.hpp"
#include "alvinlab/model.hpp"

namespace alvinlab {

using DynamicsVerdict = std::map<ExampleId, Group>;

// Minority iff the bits contain a correct -> incorrect transition or are all incorrect.
Group classify_trace(std::span<const std::uint8_t> correct);

DynamicsVerdict infer_min_maj(const PredictionTrace& trace);

// |predicted minority ∩ true minority| / |true minority|; 1.0 when there is no true minority.
// Throws UsageError if `truth` has no known group for a verdict id.
double minority_recall(const DynamicsVerdict& verdict, const std::map<ExampleId, Group>& truth);

// Ground-truth tags of the given examples, as consumed by minority_recall.
std::map<ExampleId, Group> group_tags(std::span<const Example> examples);

// CSV "id,verdict" with verdict in {min, maj}.
void write_verdict_csv(std::ostream& out, const DynamicsVerdict& verdict);

}  // namespace alvinlab
