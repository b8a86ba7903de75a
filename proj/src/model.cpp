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

#include "alvinlab/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "alvinlab/error.hpp"

namespace alvinlab {

using numkit::RowMatrix;

void ModelParams::validate() const {
    if (enc_w.rows == 0 || enc_w.cols == 0 || cls_w.rows == 0) {
        throw UsageError("model parameters have an empty dimension");
    }
    if (enc_b.size() != enc_w.rows || cls_w.cols != enc_w.rows || cls_b.size() != cls_w.rows ||
        enc_w.data.size() != enc_w.rows * enc_w.cols || cls_w.data.size() != cls_w.rows * cls_w.cols) {
        throw UsageError("model parameter shapes are inconsistent");
    }
    for (const auto* v : {&enc_w.data, &enc_b, &cls_w.data, &cls_b}) {
        for (double x : *v) {
            if (!std::isfinite(x)) {
                throw UsageError("model parameters contain a non-finite entry");
            }
        }
    }
}

ModelParams zero_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes) {
    ModelParams p;
    p.enc_w = RowMatrix(hidden_dim, input_dim);
    p.enc_b.assign(hidden_dim, 0.0);
    p.cls_w = RowMatrix(num_classes, hidden_dim);
    p.cls_b.assign(num_classes, 0.0);
    return p;
}

ModelParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes, numkit::Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0 || num_classes == 0) {
        throw UsageError("model dimensions must be positive");
    }
    ModelParams p = zero_params(input_dim, hidden_dim, num_classes);
    const double enc_limit = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
    for (double& w : p.enc_w.data) {
        w = enc_limit * (2.0 * rng.uniform() - 1.0);
    }
    const double cls_limit = std::sqrt(6.0 / static_cast<double>(hidden_dim + num_classes));
    for (double& w : p.cls_w.data) {
        w = cls_limit * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::sgd ? "sgd" : "adam"; }

Optimizer parse_optimizer(std::string_view s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw UsageError("unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (hidden_dim < 1) throw UsageError("hidden_dim must be >= 1");
    const double lr = effective_learning_rate();
    if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("learning_rate must be > 0");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw UsageError("l2 must be >= 0");
}

const PredictionTrace::Row* PredictionTrace::find(ExampleId id) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), id, [](const Row& r, ExampleId v) { return r.id < v; });
    return (it != rows.end() && it->id == id) ? &*it : nullptr;
}

namespace {

void check_input(const ModelParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim()) {
        throw UsageError("input dimension " + std::to_string(x.size()) + " does not match model input " +
                         std::to_string(params.input_dim()));
    }
}

void encode_into(const ModelParams& params, std::span<const double> x, std::span<double> z) {
    for (std::size_t h = 0; h < params.hidden_dim(); ++h) {
        const auto w = params.enc_w.row(h);
        double a = params.enc_b[h];
        for (std::size_t i = 0; i < x.size(); ++i) {
            a += w[i] * x[i];
        }
        z[h] = std::tanh(a);
    }
}

void logits_into(const ModelParams& params, std::span<const double> z, std::span<double> out) {
    for (std::size_t c = 0; c < params.num_classes(); ++c) {
        const auto w = params.cls_w.row(c);
        double a = params.cls_b[c];
        for (std::size_t h = 0; h < z.size(); ++h) {
            a += w[h] * z[h];
        }
        out[c] = a;
    }
}

void softmax_inplace(std::span<double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        total += x;
    }
    for (double& x : v) {
        x /= total;
    }
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

void adam_step(std::vector<double>& w, const std::vector<double>& g, AdamState& st, double lr, std::size_t t) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    if (st.m.empty()) {
        st.m.assign(w.size(), 0.0);
        st.v.assign(w.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
        st.m[i] = b1 * st.m[i] + (1.0 - b1) * g[i];
        st.v[i] = b2 * st.v[i] + (1.0 - b2) * g[i] * g[i];
        w[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
    }
}

void sgd_step(std::vector<double>& w, const std::vector<double>& g, double lr) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] -= lr * g[i];
    }
}

}  // namespace

numkit::Vector encode(const ModelParams& params, std::span<const double> x) {
    check_input(params, x);
    std::vector<double> z(params.hidden_dim());
    encode_into(params, x, z);
    return numkit::Vector::unchecked(std::move(z));
}

std::vector<double> logits_from_representation(const ModelParams& params, std::span<const double> z) {
    if (z.size() != params.hidden_dim()) {
        throw UsageError("representation dimension does not match hidden_dim");
    }
    std::vector<double> out(params.num_classes());
    logits_into(params, z, out);
    return out;
}

std::vector<double> predict_proba_from_representation(const ModelParams& params, std::span<const double> z) {
    auto out = logits_from_representation(params, z);
    softmax_inplace(out);
    return out;
}

std::vector<double> predict_proba(const ModelParams& params, std::span<const double> x) {
    check_input(params, x);
    std::vector<double> z(params.hidden_dim());
    encode_into(params, x, z);
    std::vector<double> out(params.num_classes());
    logits_into(params, z, out);
    softmax_inplace(out);
    return out;
}

ClassLabel predict(const ModelParams& params, std::span<const double> x) { return numkit::argmax(predict_proba(params, x)); }

std::vector<double> gradient_embedding(const ModelParams& params, std::span<const double> x) {
    check_input(params, x);
    const std::size_t H = params.hidden_dim();
    const std::size_t C = params.num_classes();
    std::vector<double> z(H);
    encode_into(params, x, z);
    std::vector<double> p(C);
    logits_into(params, z, p);
    softmax_inplace(p);
    const std::size_t yhat = numkit::argmax(p);
    std::vector<double> g(C * H);
    for (std::size_t c = 0; c < C; ++c) {
        const double r = p[c] - (c == yhat ? 1.0 : 0.0);
        for (std::size_t h = 0; h < H; ++h) {
            g[c * H + h] = r * z[h];
        }
    }
    return g;
}

RowMatrix encode_all(const ModelParams& params, std::span<const Example> examples) {
    RowMatrix out(examples.size(), params.hidden_dim());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        check_input(params, examples[i].features);
        encode_into(params, examples[i].features, out.row(i));
    }
    return out;
}

LossGradients loss_and_gradients(const ModelParams& params, std::span<const Example> batch, double l2) {
    if (batch.empty()) {
        throw UsageError("loss over an empty batch");
    }
    const std::size_t D = params.input_dim();
    const std::size_t H = params.hidden_dim();
    const std::size_t C = params.num_classes();
    LossGradients out;
    out.grad = zero_params(D, H, C);
    ModelParams& g = out.grad;

    std::vector<double> z(H);
    std::vector<double> p(C);
    std::vector<double> dz(H);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const Example& e : batch) {
        check_input(params, e.features);
        if (e.label >= C) {
            throw UsageError("label outside the model's class range");
        }
        const auto x = e.features.span();
        encode_into(params, x, z);
        logits_into(params, z, p);
        softmax_inplace(p);
        loss -= std::log(std::max(p[e.label], std::numeric_limits<double>::min()));

        std::fill(dz.begin(), dz.end(), 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            const double dl = (p[c] - (c == e.label ? 1.0 : 0.0)) * inv_n;
            g.cls_b[c] += dl;
            auto gw = g.cls_w.row(c);
            const auto w = params.cls_w.row(c);
            for (std::size_t h = 0; h < H; ++h) {
                gw[h] += dl * z[h];
                dz[h] += dl * w[h];
            }
        }
        for (std::size_t h = 0; h < H; ++h) {
            const double da = dz[h] * (1.0 - z[h] * z[h]);
            g.enc_b[h] += da;
            auto gw = g.enc_w.row(h);
            for (std::size_t i = 0; i < D; ++i) {
                gw[i] += da * x[i];
            }
        }
    }
    loss *= inv_n;

    double sq = 0.0;
    for (std::size_t i = 0; i < params.enc_w.data.size(); ++i) {
        sq += params.enc_w.data[i] * params.enc_w.data[i];
        g.enc_w.data[i] += l2 * params.enc_w.data[i];
    }
    for (std::size_t i = 0; i < params.cls_w.data.size(); ++i) {
        sq += params.cls_w.data[i] * params.cls_w.data[i];
        g.cls_w.data[i] += l2 * params.cls_w.data[i];
    }
    out.loss = loss + 0.5 * l2 * sq;
    return out;
}

TrainResult train(const ModelParams& init, std::span<const Example> labeled, const TrainConfig& cfg,
                  numkit::Rng& rng) {
    cfg.validate();
    init.validate();
    if (labeled.empty()) {
        throw UsageError("cannot train on an empty labeled set");
    }

    // Canonical id order: shuffles depend on the seed, not on how the caller stored the examples.
    std::vector<Example> data(labeled.begin(), labeled.end());
    std::sort(data.begin(), data.end(), [](const Example& a, const Example& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < data.size(); ++i) {
        if (data[i].id == data[i - 1].id) {
            throw UsageError("duplicate id in labeled set");
        }
    }

    TrainResult res;
    res.params = init;
    ModelParams& params = res.params;
    res.trace.epochs = cfg.epochs;
    res.trace.rows.reserve(data.size());
    for (const Example& e : data) {
        res.trace.rows.push_back({e.id, {}});
        res.trace.rows.back().correct.reserve(cfg.epochs);
    }

    const double lr = cfg.effective_learning_rate();
    AdamState s_enc_w, s_enc_b, s_cls_w, s_cls_b;
    std::size_t step = 0;
    std::vector<std::size_t> order(data.size());
    std::vector<Example> batch;
    batch.reserve(cfg.batch_size);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        numkit::shuffle(order, rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(data[order[i]]);
            }
            LossGradients lg = loss_and_gradients(params, batch, cfg.l2);
            if (!std::isfinite(lg.loss)) {
                throw RuntimeFailure("non-finite training loss at epoch " + std::to_string(epoch + 1) +
                                     " (learning rate " + std::to_string(lr) + " is likely too high)");
            }
            loss_sum += lg.loss * static_cast<double>(batch.size());
            ++step;
            if (cfg.optimizer == Optimizer::adam) {
                adam_step(params.enc_w.data, lg.grad.enc_w.data, s_enc_w, lr, step);
                adam_step(params.enc_b, lg.grad.enc_b, s_enc_b, lr, step);
                adam_step(params.cls_w.data, lg.grad.cls_w.data, s_cls_w, lr, step);
                adam_step(params.cls_b, lg.grad.cls_b, s_cls_b, lr, step);
            } else {
                sgd_step(params.enc_w.data, lg.grad.enc_w.data, lr);
                sgd_step(params.enc_b, lg.grad.enc_b, lr);
                sgd_step(params.cls_w.data, lg.grad.cls_w.data, lr);
                sgd_step(params.cls_b, lg.grad.cls_b, lr);
            }
        }
        res.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));

        // Correctness over the whole labeled set at the end of the epoch.
        for (std::size_t i = 0; i < data.size(); ++i) {
            const bool ok = predict(params, data[i].features) == data[i].label;
            res.trace.rows[i].correct.push_back(ok ? 1 : 0);
        }
    }
    return res;
}

void save_params_csv(const std::filesystem::path& path, const ModelParams& params) {
    std::ofstream out(path);
    if (!out) {
        throw UsageError("cannot write checkpoint " + path.string());
    }
    char buf[64];
    auto emit = [&](const char* name, std::size_t rows, std::size_t cols, const std::vector<double>& v) {
        out << name << ',' << rows << ',' << cols;
        for (double x : v) {
            const auto r = std::to_chars(buf, buf + sizeof(buf), x);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf));
        }
        out << '\n';
    };
    emit("enc_w", params.enc_w.rows, params.enc_w.cols, params.enc_w.data);
    emit("enc_b", params.enc_b.size(), 1, params.enc_b);
    emit("cls_w", params.cls_w.rows, params.cls_w.cols, params.cls_w.data);
    emit("cls_b", params.cls_b.size(), 1, params.cls_b);
}

ModelParams load_params_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open checkpoint " + path.string());
    }
    std::map<std::string, RowMatrix> tensors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() < 3) {
            throw ParseError(line_no, "checkpoint row too short");
        }
        RowMatrix m;
        try {
            m.rows = std::stoul(fields[1]);
            m.cols = std::stoul(fields[2]);
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad tensor shape");
        }
        if (fields.size() != 3 + m.rows * m.cols) {
            throw ParseError(line_no, "tensor " + fields[0] + " has the wrong number of values");
        }
        for (std::size_t i = 3; i < fields.size(); ++i) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
            if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
                throw ParseError(line_no, "bad value in tensor " + fields[0]);
            }
            m.data.push_back(v);
        }
        tensors[fields[0]] = std::move(m);
    }
    for (const char* name : {"enc_w", "enc_b", "cls_w", "cls_b"}) {
        if (!tensors.contains(name)) {
            throw ParseError(line_no, std::string("checkpoint lacks tensor ") + name);
        }
    }
    ModelParams p;
    p.enc_w = tensors["enc_w"];
    p.enc_b = tensors["enc_b"].data;
    p.cls_w = tensors["cls_w"];
    p.cls_b = tensors["cls_b"].data;
    p.validate();
    return p;
}

}  // namespace alvinlab
