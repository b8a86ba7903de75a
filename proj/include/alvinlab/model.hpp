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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "alvinlab/datasets.hpp"
#include "alvinlab/numkit.hpp"

namespace alvinlab {

/// One-hidden-layer tanh encoder followed by a linear softmax classifier.
///
/// encoder:    z = tanh(enc_w * x + enc_b)      enc_w is hidden_dim x input_dim
/// classifier: p = softmax(cls_w * z + cls_b)   cls_w is num_classes x hidden_dim
struct ModelParams {
    numkit::RowMatrix enc_w;
    std::vector<double> enc_b;
    numkit::RowMatrix cls_w;
    std::vector<double> cls_b;

    std::size_t input_dim() const noexcept { return enc_w.cols; }
    std::size_t hidden_dim() const noexcept { return enc_w.rows; }
    std::size_t num_classes() const noexcept { return cls_w.rows; }

    // Throws UsageError if shapes disagree or an entry is non-finite.
    void validate() const;

    friend bool operator==(const ModelParams& a, const ModelParams& b) {
        return a.enc_w.data == b.enc_w.data && a.enc_w.rows == b.enc_w.rows && a.enc_b == b.enc_b &&
               a.cls_w.data == b.cls_w.data && a.cls_w.rows == b.cls_w.rows && a.cls_b == b.cls_b;
    }
};

// All-zero parameters of the given shape.
ModelParams zero_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes);

// Glorot-uniform weights, zero biases.
ModelParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes, numkit::Rng& rng);

enum class Optimizer : std::uint8_t { sgd, adam };

std::string_view to_string(Optimizer o) noexcept;
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    // Unset: 0.05 for sgd, 0.005 for adam.
    std::optional<double> learning_rate;
    Optimizer optimizer = Optimizer::sgd;
    double l2 = 1e-4;
    std::size_t hidden_dim = 32;

    double effective_learning_rate() const { return learning_rate.value_or(optimizer == Optimizer::sgd ? 0.05 : 0.005); }
    void validate() const;
};

/// Per-example correctness bits, one per epoch, for the examples a model was trained on.
struct PredictionTrace {
    struct Row {
        ExampleId id;
        std::vector<std::uint8_t> correct;
    };

    std::size_t epochs = 0;
    std::vector<Row> rows;  // ascending id

    const Row* find(ExampleId id) const;
};

struct TrainResult {
    ModelParams params;
    PredictionTrace trace;
    // Per-epoch mean of mini-batch losses weighted by batch size (l2 term included).
    std::vector<double> epoch_loss;
};

TrainResult train(const ModelParams& init, std::span<const Example> labeled, const TrainConfig& cfg,
                  numkit::Rng& rng);

numkit::Vector encode(const ModelParams& params, std::span<const double> x);
std::vector<double> logits_from_representation(const ModelParams& params, std::span<const double> z);
std::vector<double> predict_proba(const ModelParams& params, std::span<const double> x);
std::vector<double> predict_proba_from_representation(const ModelParams& params, std::span<const double> z);
ClassLabel predict(const ModelParams& params, std::span<const double> x);

// (p - onehot(argmax p)) outer z, flattened row-major as [class][hidden].
std::vector<double> gradient_embedding(const ModelParams& params, std::span<const double> x);

// Encodes every example into one row of the result.
numkit::RowMatrix encode_all(const ModelParams& params, std::span<const Example> examples);

/// Loss and analytic gradients for one mini-batch:
/// mean cross-entropy + (l2 / 2) * (|enc_w|^2 + |cls_w|^2). Biases are not decayed.
struct LossGradients {
    double loss = 0.0;
    ModelParams grad;
};

LossGradients loss_and_gradients(const ModelParams& params, std::span<const Example> batch, double l2);

// Debug checkpoint: one CSV line per tensor, "name,rows,cols,v0,v1,...".
void save_params_csv(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_params_csv(const std::filesystem::path& path);

}  // namespace alvinlab
