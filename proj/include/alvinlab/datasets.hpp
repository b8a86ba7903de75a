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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alvinlab/numkit.hpp"

namespace alvinlab {

using ExampleId = std::int64_t;
using ClassLabel = std::size_t;

enum class Group : std::uint8_t { unknown, minority, majority };

std::string_view to_string(Group g) noexcept;

struct Example {
    ExampleId id = 0;
    numkit::Vector features;
    ClassLabel label = 0;
    Group group = Group::unknown;

    friend bool operator==(const Example&, const Example&) = default;
};

enum class SplitRole : std::uint8_t { train, id_test, ood_test };

std::string_view to_string(SplitRole r) noexcept;
SplitRole parse_split_role(std::string_view s);

/// Immutable collection of examples sharing one feature dimension and label space.
class DatasetSplit {
 public:
    DatasetSplit(std::vector<Example> examples, std::size_t num_classes, SplitRole role);

    const std::vector<Example>& examples() const noexcept { return examples_; }
    std::size_t size() const noexcept { return examples_.size(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t dimension() const noexcept { return examples_.front().features.size(); }
    SplitRole role() const noexcept { return role_; }

    bool contains(ExampleId id) const { return index_.contains(id); }
    // Throws UsageError for unknown ids.
    const Example& at(ExampleId id) const;
    std::size_t position(ExampleId id) const;

    friend bool operator==(const DatasetSplit& a, const DatasetSplit& b) {
        return a.num_classes_ == b.num_classes_ && a.role_ == b.role_ && a.examples_ == b.examples_;
    }

 private:
    std::vector<Example> examples_;
    std::size_t num_classes_;
    SplitRole role_;
    std::unordered_map<ExampleId, std::size_t> index_;
};

struct ShortcutConfig {
    std::size_t num_classes = 2;
    std::size_t core_dim = 8;
    std::size_t shortcut_dim = 2;
    double majority_fraction = 0.9;
    std::size_t train_size = 5000;
    std::size_t id_test_size = 2000;
    std::size_t ood_test_size = 2000;
    double noise_std = 0.1;
    // Defaults to 1 - majority_fraction when unset.
    std::optional<double> ood_majority_fraction;
    // Core block is N(core_margin * core_std * e_label, core_std^2 I).
    double core_margin = 2.75;
    double core_std = 0.05;

    double effective_ood_majority_fraction() const {
        return ood_majority_fraction.value_or(1.0 - majority_fraction);
    }
    void validate() const;
};

struct ShortcutDataset {
    DatasetSplit train;
    DatasetSplit id_test;
    DatasetSplit ood_test;
};

/// Synthetic data whose majority examples carry a label-revealing shortcut block.
///
/// Core block: N(core_margin * core_std * e_{label mod core_dim}, core_std^2 I). Shortcut block: one-hot code of
/// the label (majority) or of a uniformly drawn other class (minority), plus
/// N(0, noise_std^2) jitter. Within each class exactly round(fraction * n_c)
/// examples are majority; ids are contiguous per split (train from 0, id_test
/// from 1'000'000, ood_test from 2'000'000).
ShortcutDataset generate_shortcut_dataset(const ShortcutConfig& cfg, numkit::Rng& rng);

struct EmbeddingSchema {
    std::size_t num_classes = 0;
    std::size_t dimension = 0;
    SplitRole role = SplitRole::train;
};

EmbeddingSchema read_schema(const std::filesystem::path& path);
void write_schema(const std::filesystem::path& path, const EmbeddingSchema& schema);

// CSV header: id,label,group,f0,...,f{d-1}; group in {min, maj, _}.
DatasetSplit load_embedding_dataset(std::istream& in, const EmbeddingSchema& schema);
DatasetSplit load_embedding_dataset(const std::filesystem::path& csv_path, const EmbeddingSchema& schema);
// Loads `<stem>.csv` using the sidecar `<stem>.schema.json`.
DatasetSplit load_embedding_dataset(const std::filesystem::path& csv_path);

// Shortest round-trip float formatting, so write-then-load is exact.
void write_embedding_dataset(std::ostream& out, const DatasetSplit& split);
void write_embedding_dataset(const std::filesystem::path& csv_path, const DatasetSplit& split);

/// Labeled/unlabeled partition of a train split plus per-round annotation log.
struct PoolState {
    std::set<ExampleId> labeled;
    std::set<ExampleId> unlabeled;
    std::vector<ExampleId> seed_ids;
    std::vector<std::vector<ExampleId>> round_log;
};

PoolState init_pool(const DatasetSplit& train, double seed_fraction, numkit::Rng& rng);

// Number of seed examples init_pool draws: max(C, round(fraction * |train|)).
std::size_t seed_count(std::size_t train_size, std::size_t num_classes, double seed_fraction);

PoolState annotate(PoolState pool, std::span<const ExampleId> ids);

// Throws RuntimeFailure describing the first violated partition invariant.
void audit_pool(const PoolState& pool, const DatasetSplit& train);

std::vector<Example> labeled_examples(const PoolState& pool, const DatasetSplit& train);
std::vector<Example> unlabeled_examples(const PoolState& pool, const DatasetSplit& train);

}  // namespace alvinlab
