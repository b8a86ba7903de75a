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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alvinlab/alvin.hpp"
#include "alvinlab/baselines.hpp"
#include "alvinlab/datasets.hpp"
#include "alvinlab/metrics.hpp"
#include "alvinlab/model.hpp"

namespace alvinlab {

struct DatasetFiles {
    std::filesystem::path train;
    std::filesystem::path id_test;
    std::filesystem::path ood_test;
};

struct ExperimentConfig {
    // Exactly one of these is set.
    std::optional<ShortcutConfig> synthetic;
    std::optional<DatasetFiles> files;

    StrategyId strategy = StrategyId::alvin;
    TrainConfig train{};
    AlvinConfig alvin{};
    BaselineConfig baselines{};
    double budget_fraction = 0.10;
    double seed_fraction = 0.001;
    std::size_t b = 50;
    std::vector<std::uint64_t> seeds = {0};
    std::filesystem::path output_dir = "out";

    // Throws ConfigError.
    void validate() const;
};

// Unknown keys anywhere in the document are rejected with ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RoundResult {
    std::size_t round = 0;
    std::size_t labeled_count = 0;
    double id_accuracy = 0.0;
    double ood_accuracy = 0.0;
    std::vector<ExampleId> batch_ids;
    // Absent on the last round, which evaluates without selecting.
    std::optional<BatchReport> report;
    std::optional<double> minority_recall;
    bool fallback = false;
    double selection_seconds = 0.0;
};

struct SeedRun {
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    std::vector<RoundResult> rounds;
};

struct LoadedData {
    DatasetSplit train;
    DatasetSplit id_test;
    DatasetSplit ood_test;
};

// Synthetic data is drawn from `rng`; file datasets ignore it.
LoadedData load_data(const ExperimentConfig& cfg, numkit::Rng& rng);

double evaluate(const ModelParams& params, const DatasetSplit& split);

/// Runs one seed. When `out_dir` is set, rows are appended to
/// <out_dir>/seed_<seed>.jsonl as each round completes, selection times go to
/// timing_seed_<seed>.csv and batches to batches_seed_<seed>.csv.
SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Runs every seed, writing under <output_dir>/<strategy>/.
std::vector<SeedRun> run_experiment(const ExperimentConfig& cfg);

std::string round_to_json(const RoundResult& r, const SeedRun& run);
SeedRun load_seed_run(const std::filesystem::path& jsonl_path);
// Reads every <strategy>/seed_*.jsonl below `dir`.
std::vector<SeedRun> load_runs(const std::filesystem::path& dir);

struct BenchEntry {
    StrategyId strategy;
    double seconds = 0.0;
};

/// Times one selection of `n` instances per strategy on identical inputs: a
/// model trained on `labeled_count` random train examples, the rest forming the pool.
/// Reports the median over `repeats` calls.
std::vector<BenchEntry> time_selection(const ExperimentConfig& cfg, std::span<const StrategyId> strategies,
                                       std::size_t n = 100, std::size_t labeled_count = 500,
                                       std::size_t repeats = 3);

inline constexpr std::array<double, 3> kCheckpoints = {0.01, 0.05, 0.10};

// Index of the round whose labeled fraction is nearest `fraction` (earlier round on ties).
std::size_t checkpoint_round(const SeedRun& run, double fraction);

struct SummaryRow {
    std::string strategy;
    double checkpoint = 0.0;
    std::size_t seeds = 0;
    double id_mean = 0.0;
    double id_std = 0.0;
    double ood_mean = 0.0;
    double ood_std = 0.0;
    // Mean over seeds that recorded recall; nullopt if none did.
    std::optional<double> recall_mean;
    std::optional<double> recall_std;
    double selection_seconds_mean = 0.0;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Population standard deviation.
MeanStd mean_std(std::span<const double> xs);

// One row per (strategy, checkpoint), strategies in order of first appearance.
std::vector<SummaryRow> summarize(std::span<const SeedRun> runs);

/// Writes summary.csv, learning_curve.csv, minority_recall.csv and timing.csv.
void write_report(std::span<const SeedRun> runs, const std::filesystem::path& out_dir);

}  // namespace alvinlab
