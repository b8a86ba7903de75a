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

#include "alvinlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

#include "alvinlab/dynamics.hpp"
#include "alvinlab/error.hpp"
#include "json.hpp"

namespace alvinlab {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

std::string path_of(std::string_view where, std::string_view key) {
    return std::string(where) + "." + std::string(key);
}

std::size_t get_count(const json& j, std::string_view where, std::string_view key) {
    const json& v = j.at(std::string(key));
    if (!v.is_number_unsigned()) {
        throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

double get_real(const json& j, std::string_view where, std::string_view key) {
    const json& v = j.at(std::string(key));
    if (!v.is_number()) {
        throw ConfigError(path_of(where, key) + ": expected a number");
    }
    return v.get<double>();
}

std::string get_string(const json& j, std::string_view where, std::string_view key) {
    const json& v = j.at(std::string(key));
    if (!v.is_string()) {
        throw ConfigError(path_of(where, key) + ": expected a string");
    }
    return v.get<std::string>();
}

bool get_bool(const json& j, std::string_view where, std::string_view key) {
    const json& v = j.at(std::string(key));
    if (!v.is_boolean()) {
        throw ConfigError(path_of(where, key) + ": expected true or false");
    }
    return v.get<bool>();
}

template <class F>
void maybe(const json& j, std::string_view key, F&& f) {
    if (j.contains(std::string(key))) {
        f();
    }
}

ShortcutConfig parse_synthetic(const json& j) {
    constexpr std::string_view w = "dataset.synthetic";
    check_keys(j, w,
               {"num_classes", "core_dim", "shortcut_dim", "majority_fraction", "train_size", "id_test_size",
                "ood_test_size", "noise_std", "ood_majority_fraction", "core_margin", "core_std"});
    ShortcutConfig s;
    maybe(j, "num_classes", [&] { s.num_classes = get_count(j, w, "num_classes"); });
    maybe(j, "core_dim", [&] { s.core_dim = get_count(j, w, "core_dim"); });
    maybe(j, "shortcut_dim", [&] { s.shortcut_dim = get_count(j, w, "shortcut_dim"); });
    maybe(j, "majority_fraction", [&] { s.majority_fraction = get_real(j, w, "majority_fraction"); });
    maybe(j, "train_size", [&] { s.train_size = get_count(j, w, "train_size"); });
    maybe(j, "id_test_size", [&] { s.id_test_size = get_count(j, w, "id_test_size"); });
    maybe(j, "ood_test_size", [&] { s.ood_test_size = get_count(j, w, "ood_test_size"); });
    maybe(j, "noise_std", [&] { s.noise_std = get_real(j, w, "noise_std"); });
    maybe(j, "ood_majority_fraction", [&] { s.ood_majority_fraction = get_real(j, w, "ood_majority_fraction"); });
    maybe(j, "core_margin", [&] { s.core_margin = get_real(j, w, "core_margin"); });
    maybe(j, "core_std", [&] { s.core_std = get_real(j, w, "core_std"); });
    return s;
}

DatasetFiles parse_files(const json& j) {
    constexpr std::string_view w = "dataset.files";
    check_keys(j, w, {"train", "id_test", "ood_test"});
    DatasetFiles f;
    f.train = get_string(j, w, "train");
    f.id_test = get_string(j, w, "id_test");
    f.ood_test = get_string(j, w, "ood_test");
    return f;
}

TrainConfig parse_train(const json& j) {
    constexpr std::string_view w = "train";
    check_keys(j, w, {"epochs", "batch_size", "learning_rate", "optimizer", "l2", "hidden_dim"});
    TrainConfig t;
    maybe(j, "epochs", [&] { t.epochs = get_count(j, w, "epochs"); });
    maybe(j, "batch_size", [&] { t.batch_size = get_count(j, w, "batch_size"); });
    maybe(j, "learning_rate", [&] { t.learning_rate = get_real(j, w, "learning_rate"); });
    maybe(j, "optimizer", [&] { t.optimizer = parse_optimizer(get_string(j, w, "optimizer")); });
    maybe(j, "l2", [&] { t.l2 = get_real(j, w, "l2"); });
    maybe(j, "hidden_dim", [&] { t.hidden_dim = get_count(j, w, "hidden_dim"); });
    return t;
}

AlvinConfig parse_alvin(const json& j) {
    constexpr std::string_view w = "alvin";
    check_keys(j, w,
               {"anchors_per_pair", "alpha", "beta", "pair_sample", "knn_k", "fixed_lambda", "cap_all_pairs"});
    AlvinConfig a;
    maybe(j, "anchors_per_pair", [&] { a.anchors_per_pair = get_count(j, w, "anchors_per_pair"); });
    maybe(j, "alpha", [&] { a.alpha = get_real(j, w, "alpha"); });
    maybe(j, "beta", [&] { a.beta = get_real(j, w, "beta"); });
    maybe(j, "pair_sample", [&] { a.pair_sample = get_count(j, w, "pair_sample"); });
    maybe(j, "knn_k", [&] { a.knn_k = get_count(j, w, "knn_k"); });
    maybe(j, "fixed_lambda", [&] { a.fixed_lambda = get_real(j, w, "fixed_lambda"); });
    maybe(j, "cap_all_pairs", [&] { a.cap_all_pairs = get_bool(j, w, "cap_all_pairs"); });
    return a;
}

BaselineConfig parse_baselines(const json& j) {
    constexpr std::string_view w = "baselines";
    check_keys(j, w, {"cal_neighbor_k", "alfa_mix_grid", "kmeans_max_iters"});
    BaselineConfig c;
    maybe(j, "cal_neighbor_k", [&] { c.cal_neighbor_k = get_count(j, w, "cal_neighbor_k"); });
    maybe(j, "kmeans_max_iters", [&] { c.kmeans_max_iters = get_count(j, w, "kmeans_max_iters"); });
    maybe(j, "alfa_mix_grid", [&] {
        const json& g = j.at("alfa_mix_grid");
        if (!g.is_array()) {
            throw ConfigError("baselines.alfa_mix_grid: expected an array of numbers");
        }
        c.alfa_mix_grid.clear();
        for (const json& v : g) {
            if (!v.is_number()) {
                throw ConfigError("baselines.alfa_mix_grid: expected an array of numbers");
            }
            c.alfa_mix_grid.push_back(v.get<double>());
        }
    });
    return c;
}

// Shortest round-trip decimal form.
std::string fmt(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::size_t stop_count(const ExperimentConfig& cfg, std::size_t train_size) {
    return static_cast<std::size_t>(std::ceil(cfg.budget_fraction * static_cast<double>(train_size) - 1e-9));
}

bool has_ground_truth(const DatasetSplit& split) {
    return std::all_of(split.examples().begin(), split.examples().end(),
                       [](const Example& e) { return e.group != Group::unknown; });
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RuntimeFailure("cannot write " + p.string());
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (synthetic.has_value() == files.has_value()) {
        throw ConfigError("dataset: exactly one of 'synthetic' or 'files' must be given");
    }
    try {
        if (synthetic) {
            synthetic->validate();
        }
        train.validate();
        alvin.validate();
        baselines.validate();
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    if (!(seed_fraction > 0.0 && seed_fraction < budget_fraction && budget_fraction <= 1.0)) {
        throw ConfigError("need 0 < seed_fraction < budget_fraction <= 1");
    }
    if (b < 1) {
        throw ConfigError("b must be >= 1");
    }
    if (seeds.empty()) {
        throw ConfigError("seeds must list at least one seed");
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"dataset", "strategy", "train", "alvin", "baselines", "budget_fraction", "seed_fraction", "b",
                "seeds", "output_dir"});
    ExperimentConfig cfg;
    try {
        if (!j.contains("dataset")) {
            throw ConfigError("config: missing 'dataset'");
        }
        const json& d = j.at("dataset");
        check_keys(d, "dataset", {"synthetic", "files"});
        maybe(d, "synthetic", [&] { cfg.synthetic = parse_synthetic(d.at("synthetic")); });
        maybe(d, "files", [&] { cfg.files = parse_files(d.at("files")); });
        maybe(j, "strategy", [&] { cfg.strategy = parse_strategy(get_string(j, "config", "strategy")); });
        maybe(j, "train", [&] { cfg.train = parse_train(j.at("train")); });
        maybe(j, "alvin", [&] { cfg.alvin = parse_alvin(j.at("alvin")); });
        maybe(j, "baselines", [&] { cfg.baselines = parse_baselines(j.at("baselines")); });
        maybe(j, "budget_fraction", [&] { cfg.budget_fraction = get_real(j, "config", "budget_fraction"); });
        maybe(j, "seed_fraction", [&] { cfg.seed_fraction = get_real(j, "config", "seed_fraction"); });
        maybe(j, "b", [&] { cfg.b = get_count(j, "config", "b"); });
        maybe(j, "output_dir", [&] { cfg.output_dir = get_string(j, "config", "output_dir"); });
        maybe(j, "seeds", [&] {
            const json& s = j.at("seeds");
            if (!s.is_array()) {
                throw ConfigError("config.seeds: expected an array of non-negative integers");
            }
            cfg.seeds.clear();
            for (const json& v : s) {
                if (!v.is_number_unsigned()) {
                    throw ConfigError("config.seeds: expected an array of non-negative integers");
                }
                cfg.seeds.push_back(v.get<std::uint64_t>());
            }
        });
    } catch (const UsageError& e) {
        // Bad enum spellings surface as usage errors from the parsers.
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str());
    if (cfg.files) {
        const auto base = path.parent_path();
        for (auto* p : {&cfg.files->train, &cfg.files->id_test, &cfg.files->ood_test}) {
            if (p->is_relative()) {
                *p = base / *p;
            }
        }
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.synthetic) {
        const auto& s = *cfg.synthetic;
        json sj = {{"num_classes", s.num_classes},   {"core_dim", s.core_dim},
                   {"shortcut_dim", s.shortcut_dim}, {"majority_fraction", s.majority_fraction},
                   {"train_size", s.train_size},     {"id_test_size", s.id_test_size},
                   {"ood_test_size", s.ood_test_size}, {"noise_std", s.noise_std},
                   {"core_margin", s.core_margin},   {"core_std", s.core_std}};
        if (s.ood_majority_fraction) {
            sj["ood_majority_fraction"] = *s.ood_majority_fraction;
        }
        j["dataset"] = {{"synthetic", sj}};
    } else if (cfg.files) {
        j["dataset"] = {{"files",
                         {{"train", cfg.files->train.string()},
                          {"id_test", cfg.files->id_test.string()},
                          {"ood_test", cfg.files->ood_test.string()}}}};
    }
    j["strategy"] = std::string(to_string(cfg.strategy));
    json tj = {{"epochs", cfg.train.epochs},
               {"batch_size", cfg.train.batch_size},
               {"optimizer", std::string(to_string(cfg.train.optimizer))},
               {"l2", cfg.train.l2},
               {"hidden_dim", cfg.train.hidden_dim}};
    if (cfg.train.learning_rate) {
        tj["learning_rate"] = *cfg.train.learning_rate;
    }
    j["train"] = tj;
    json aj = {{"anchors_per_pair", cfg.alvin.anchors_per_pair},
               {"alpha", cfg.alvin.alpha},
               {"beta", cfg.alvin.beta},
               {"pair_sample", cfg.alvin.pair_sample},
               {"knn_k", cfg.alvin.knn_k},
               {"cap_all_pairs", cfg.alvin.cap_all_pairs}};
    if (cfg.alvin.fixed_lambda) {
        aj["fixed_lambda"] = *cfg.alvin.fixed_lambda;
    }
    j["alvin"] = aj;
    j["baselines"] = {{"cal_neighbor_k", cfg.baselines.cal_neighbor_k},
                      {"alfa_mix_grid", cfg.baselines.alfa_mix_grid},
                      {"kmeans_max_iters", cfg.baselines.kmeans_max_iters}};
    j["budget_fraction"] = cfg.budget_fraction;
    j["seed_fraction"] = cfg.seed_fraction;
    j["b"] = cfg.b;
    j["seeds"] = cfg.seeds;
    j["output_dir"] = cfg.output_dir.string();
    return j.dump(2);
}

LoadedData load_data(const ExperimentConfig& cfg, numkit::Rng& rng) {
    if (cfg.synthetic) {
        auto ds = generate_shortcut_dataset(*cfg.synthetic, rng);
        return {std::move(ds.train), std::move(ds.id_test), std::move(ds.ood_test)};
    }
    if (!cfg.files) {
        throw ConfigError("no dataset configured");
    }
    LoadedData d{load_embedding_dataset(cfg.files->train), load_embedding_dataset(cfg.files->id_test),
                 load_embedding_dataset(cfg.files->ood_test)};
    if (d.id_test.num_classes() != d.train.num_classes() || d.ood_test.num_classes() != d.train.num_classes() ||
        d.id_test.dimension() != d.train.dimension() || d.ood_test.dimension() != d.train.dimension()) {
        throw ConfigError("dataset files disagree on class count or dimension");
    }
    return d;
}

double evaluate(const ModelParams& params, const DatasetSplit& split) {
    if (split.size() == 0) {
        throw UsageError("cannot evaluate on an empty split");
    }
    std::size_t hits = 0;
    for (const Example& e : split.examples()) {
        if (predict(params, e.features) == e.label) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(split.size());
}

std::string round_to_json(const RoundResult& r, const SeedRun& run) {
    // Timing is kept out so reruns are byte-identical.
    nlohmann::ordered_json j;
    j["strategy"] = run.strategy;
    j["seed"] = run.seed;
    j["train_size"] = run.train_size;
    j["round"] = r.round;
    j["labeled_count"] = r.labeled_count;
    j["id_accuracy"] = r.id_accuracy;
    j["ood_accuracy"] = r.ood_accuracy;
    j["minority_recall"] = r.minority_recall ? nlohmann::ordered_json(*r.minority_recall) : nullptr;
    j["fallback"] = r.fallback;
    j["batch_ids"] = r.batch_ids;
    if (r.report) {
        const auto& b = *r.report;
        j["batch"] = {{"uncertainty", b.uncertainty},
                      {"diversity", b.diversity_degenerate ? nlohmann::ordered_json(nullptr)
                                                           : nlohmann::ordered_json(b.diversity)},
                      {"diversity_degenerate", b.diversity_degenerate},
                      {"representativeness", b.representativeness},
                      {"batch_size", b.batch_size}};
    } else {
        j["batch"] = nullptr;
    }
    return j.dump();
}

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir) {
    cfg.validate();
    numkit::Rng root(seed);
    numkit::Rng data_rng = root.child(1);
    numkit::Rng pool_rng = root.child(2);
    const LoadedData data = load_data(cfg, data_rng);
    const DatasetSplit& train_split = data.train;
    PoolState pool = init_pool(train_split, cfg.seed_fraction, pool_rng);

    SeedRun run;
    run.strategy = std::string(to_string(cfg.strategy));
    run.seed = seed;
    run.train_size = train_split.size();

    std::ofstream jsonl, timing, batches;
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        const std::string tag = "seed_" + std::to_string(seed);
        jsonl = open_out(*out_dir / (tag + ".jsonl"));
        timing = open_out(*out_dir / ("timing_" + tag + ".csv"));
        batches = open_out(*out_dir / ("batches_" + tag + ".csv"));
        timing << "round,selection_seconds\n";
    }

    const std::size_t C = train_split.num_classes();
    const std::size_t D = train_split.dimension();
    const std::size_t H = cfg.train.hidden_dim;
    const std::size_t budget = stop_count(cfg, train_split.size());
    const bool truth_known = has_ground_truth(train_split);
    const auto truth = truth_known ? group_tags(train_split.examples()) : std::map<ExampleId, Group>{};

    std::optional<ModelParams> reference;
    auto reference_model = [&]() -> const ModelParams& {
        if (!reference) {
            numkit::Rng ref_rng = root.child(3);
            numkit::Rng init_rng = ref_rng.child(1);
            numkit::Rng fit_rng = ref_rng.child(2);
            reference = train(init_params(D, H, C, init_rng), train_split.examples(), cfg.train, fit_rng).params;
        }
        return *reference;
    };

    for (std::size_t r = 0;; ++r) {
        numkit::Rng round_rng = root.child(1000 + r);
        numkit::Rng init_rng = round_rng.child(1);
        numkit::Rng fit_rng = round_rng.child(2);
        numkit::Rng select_rng = round_rng.child(3);

        RoundResult res;
        res.round = r;
        try {
            const auto labeled = labeled_examples(pool, train_split);
            res.labeled_count = labeled.size();
            const TrainResult fit = train(init_params(D, H, C, init_rng), labeled, cfg.train, fit_rng);
            res.id_accuracy = evaluate(fit.params, data.id_test);
            res.ood_accuracy = evaluate(fit.params, data.ood_test);
            if (truth_known) {
                res.minority_recall = minority_recall(infer_min_maj(fit.trace), truth);
            }
            const bool done = labeled.size() >= budget || pool.unlabeled.empty();
            if (!done) {
                RoundInputs in{fit.params, train_split, pool, &fit.trace};
                in.batch_size = std::min(cfg.b, pool.unlabeled.size());
                in.alvin = cfg.alvin;
                in.baselines = cfg.baselines;
                AcquisitionBatch batch = select(cfg.strategy, in, select_rng);
                const std::vector<ExampleId> pool_ids(pool.unlabeled.begin(), pool.unlabeled.end());
                res.report = make_batch_report(reference_model(), batch.ids, pool_ids, train_split, r);
                res.batch_ids = batch.ids;
                res.fallback = batch.fallback;
                res.selection_seconds = batch.seconds;
                pool = annotate(std::move(pool), batch.ids);
                audit_pool(pool, train_split);
                if (out_dir) {
                    write_batch_csv(batches, r, batch, r == 0);
                    timing << r << ',' << fmt(batch.seconds) << '\n';
                    timing.flush();
                    batches.flush();
                }
            }
            run.rounds.push_back(res);
            if (out_dir) {
                jsonl << round_to_json(res, run) << '\n';
                jsonl.flush();
            }
            if (done) {
                break;
            }
        } catch (const Error& e) {
            if (out_dir) {
                json fail = {{"status", "failed"}, {"round", r}, {"error", e.what()}};
                jsonl << fail.dump() << '\n';
                jsonl.flush();
            }
            throw RuntimeFailure("seed " + std::to_string(seed) + ", round " + std::to_string(r) + ": " + e.what());
        }
    }
    return run;
}

std::vector<SeedRun> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = cfg.output_dir / std::string(to_string(cfg.strategy));
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "config.json");
        out << config_to_json(cfg) << '\n';
    }
    std::vector<SeedRun> runs;
    for (std::uint64_t s : cfg.seeds) {
        runs.push_back(run_seed(cfg, s, dir));
    }
    return runs;
}

SeedRun load_seed_run(const std::filesystem::path& jsonl_path) {
    std::ifstream in(jsonl_path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read " + jsonl_path.string());
    }
    SeedRun run;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("malformed results row: ") + e.what());
        }
        if (j.contains("status")) {
            throw RuntimeFailure(jsonl_path.string() + " records a failed run: " +
                                 j.value("error", std::string("unknown error")));
        }
        try {
            run.strategy = j.at("strategy").get<std::string>();
            run.seed = j.at("seed").get<std::uint64_t>();
            run.train_size = j.at("train_size").get<std::size_t>();
            RoundResult r;
            r.round = j.at("round").get<std::size_t>();
            r.labeled_count = j.at("labeled_count").get<std::size_t>();
            r.id_accuracy = j.at("id_accuracy").get<double>();
            r.ood_accuracy = j.at("ood_accuracy").get<double>();
            if (!j.at("minority_recall").is_null()) {
                r.minority_recall = j.at("minority_recall").get<double>();
            }
            r.fallback = j.at("fallback").get<bool>();
            r.batch_ids = j.at("batch_ids").get<std::vector<ExampleId>>();
            const json& b = j.at("batch");
            if (!b.is_null()) {
                BatchReport rep;
                rep.round = r.round;
                rep.uncertainty = b.at("uncertainty").get<double>();
                rep.diversity_degenerate = b.at("diversity_degenerate").get<bool>();
                rep.diversity = rep.diversity_degenerate ? std::numeric_limits<double>::infinity()
                                                         : b.at("diversity").get<double>();
                rep.representativeness = b.at("representativeness").get<double>();
                rep.batch_size = b.at("batch_size").get<std::size_t>();
                r.report = rep;
            }
            run.rounds.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("bad results row: ") + e.what());
        }
    }
    if (run.rounds.empty()) {
        throw UsageError(jsonl_path.string() + " holds no rounds");
    }

    auto timing_path = jsonl_path.parent_path() / ("timing_" + jsonl_path.stem().string() + ".csv");
    if (std::ifstream t{timing_path}) {
        std::string row;
        std::getline(t, row);
        while (std::getline(t, row)) {
            const auto comma = row.find(',');
            if (comma == std::string::npos) {
                continue;
            }
            const std::size_t round = std::stoul(row.substr(0, comma));
            const double secs = std::stod(row.substr(comma + 1));
            for (auto& r : run.rounds) {
                if (r.round == round) {
                    r.selection_seconds = secs;
                }
            }
        }
    }
    return run;
}

std::vector<SeedRun> load_runs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw UsageError("not a directory: " + dir.string());
    }
    static const std::regex kSeedFile(R"(seed_\d+\.jsonl)");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), kSeedFile)) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<SeedRun> runs;
    for (const auto& f : files) {
        runs.push_back(load_seed_run(f));
    }
    return runs;
}

std::vector<BenchEntry> time_selection(const ExperimentConfig& cfg, std::span<const StrategyId> strategies,
                                       std::size_t n, std::size_t labeled_count, std::size_t repeats) {
    cfg.validate();
    if (n < 1 || repeats < 1) {
        throw UsageError("bench needs n >= 1 and repeats >= 1");
    }
    numkit::Rng root(cfg.seeds.front());
    numkit::Rng data_rng = root.child(1);
    const LoadedData data = load_data(cfg, data_rng);
    const DatasetSplit& tr = data.train;
    if (labeled_count < tr.num_classes() || labeled_count + n > tr.size()) {
        throw UsageError("bench needs num_classes <= labeled and labeled + n <= train size");
    }
    numkit::Rng pool_rng = root.child(2);
    const PoolState pool =
        init_pool(tr, static_cast<double>(labeled_count) / static_cast<double>(tr.size()), pool_rng);
    numkit::Rng init_rng = root.child(3);
    numkit::Rng fit_rng = root.child(4);
    const TrainResult fit = train(init_params(tr.dimension(), cfg.train.hidden_dim, tr.num_classes(), init_rng),
                                  labeled_examples(pool, tr), cfg.train, fit_rng);

    std::vector<BenchEntry> out;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        RoundInputs in{fit.params, tr, pool, &fit.trace};
        in.batch_size = n;
        in.alvin = cfg.alvin;
        in.baselines = cfg.baselines;
        std::vector<double> times;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            numkit::Rng rng = root.child(100 + s * repeats + rep);
            times.push_back(select(strategies[s], in, rng).seconds);
        }
        std::sort(times.begin(), times.end());
        out.push_back({strategies[s], times[times.size() / 2]});
    }
    return out;
}

std::size_t checkpoint_round(const SeedRun& run, double fraction) {
    if (run.rounds.empty() || run.train_size == 0) {
        throw UsageError("checkpoint of an empty run");
    }
    std::size_t best = 0;
    // Compared in label counts so equidistant rounds tie exactly.
    const double target = fraction * static_cast<double>(run.train_size);
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.rounds.size(); ++i) {
        const double gap = std::abs(static_cast<double>(run.rounds[i].labeled_count) - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return best;
}

MeanStd mean_std(std::span<const double> xs) {
    if (xs.empty()) {
        throw UsageError("mean of an empty sample");
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

namespace {

std::vector<std::pair<std::string, std::vector<const SeedRun*>>> by_strategy(std::span<const SeedRun> runs) {
    std::vector<std::pair<std::string, std::vector<const SeedRun*>>> groups;
    for (const SeedRun& r : runs) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == r.strategy; });
        if (it == groups.end()) {
            groups.push_back({r.strategy, {}});
            it = groups.end() - 1;
        }
        it->second.push_back(&r);
    }
    return groups;
}

}  // namespace

std::vector<SummaryRow> summarize(std::span<const SeedRun> runs) {
    if (runs.empty()) {
        throw UsageError("nothing to summarize");
    }
    std::vector<SummaryRow> rows;
    for (const auto& [strategy, members] : by_strategy(runs)) {
        std::vector<double> secs;
        for (const SeedRun* run : members) {
            for (const auto& r : run->rounds) {
                if (r.report) {
                    secs.push_back(r.selection_seconds);
                }
            }
        }
        const double secs_mean = secs.empty() ? 0.0 : mean_std(secs).mean;
        for (double cp : kCheckpoints) {
            std::vector<double> id, ood, recall;
            for (const SeedRun* run : members) {
                const auto& r = run->rounds[checkpoint_round(*run, cp)];
                id.push_back(r.id_accuracy);
                ood.push_back(r.ood_accuracy);
                if (r.minority_recall) {
                    recall.push_back(*r.minority_recall);
                }
            }
            SummaryRow row;
            row.strategy = strategy;
            row.checkpoint = cp;
            row.seeds = members.size();
            const auto i = mean_std(id);
            const auto o = mean_std(ood);
            row.id_mean = i.mean;
            row.id_std = i.std;
            row.ood_mean = o.mean;
            row.ood_std = o.std;
            if (!recall.empty()) {
                const auto m = mean_std(recall);
                row.recall_mean = m.mean;
                row.recall_std = m.std;
            }
            row.selection_seconds_mean = secs_mean;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_report(std::span<const SeedRun> runs, const std::filesystem::path& out_dir) {
    const auto rows = summarize(runs);
    std::filesystem::create_directories(out_dir);
    constexpr const char* kStdNote = "# std is the population standard deviation over seeds (divisor n)\n";

    auto summary = open_out(out_dir / "summary.csv");
    summary << kStdNote << "strategy,checkpoint,seeds,id_mean,id_std,ood_mean,ood_std\n";
    for (const auto& r : rows) {
        summary << r.strategy << ',' << fmt(r.checkpoint) << ',' << r.seeds << ',' << fmt(r.id_mean) << ','
                << fmt(r.id_std) << ',' << fmt(r.ood_mean) << ',' << fmt(r.ood_std) << '\n';
    }

    auto recall = open_out(out_dir / "minority_recall.csv");
    recall << kStdNote << "strategy,checkpoint,seeds,recall_mean,recall_std\n";
    for (const auto& r : rows) {
        if (r.recall_mean) {
            recall << r.strategy << ',' << fmt(r.checkpoint) << ',' << r.seeds << ',' << fmt(*r.recall_mean) << ','
                   << fmt(*r.recall_std) << '\n';
        }
    }

    auto timing = open_out(out_dir / "timing.csv");
    timing << "strategy,selection_seconds_mean\n";
    for (std::size_t i = 0; i < rows.size(); i += kCheckpoints.size()) {
        timing << rows[i].strategy << ',' << fmt(rows[i].selection_seconds_mean) << '\n';
    }

    auto curve = open_out(out_dir / "learning_curve.csv");
    curve << kStdNote << "strategy,round,labeled_count,labeled_fraction,checkpoint,seeds,id_mean,id_std,ood_mean,ood_std\n";
    for (const auto& [strategy, members] : by_strategy(runs)) {
        std::size_t max_rounds = 0;
        for (const SeedRun* run : members) {
            max_rounds = std::max(max_rounds, run->rounds.size());
        }
        for (std::size_t k = 0; k < max_rounds; ++k) {
            std::vector<double> id, ood, count, frac;
            std::optional<double> checkpoint;
            for (const SeedRun* run : members) {
                if (k >= run->rounds.size()) {
                    continue;
                }
                const auto& r = run->rounds[k];
                id.push_back(r.id_accuracy);
                ood.push_back(r.ood_accuracy);
                count.push_back(static_cast<double>(r.labeled_count));
                frac.push_back(static_cast<double>(r.labeled_count) / static_cast<double>(run->train_size));
                for (double cp : kCheckpoints) {
                    if (checkpoint_round(*run, cp) == k) {
                        checkpoint = cp;
                    }
                }
            }
            const auto i = mean_std(id);
            const auto o = mean_std(ood);
            curve << strategy << ',' << k << ',' << fmt(mean_std(count).mean) << ',' << fmt(mean_std(frac).mean)
                  << ',' << (checkpoint ? fmt(*checkpoint) : std::string()) << ',' << id.size() << ','
                  << fmt(i.mean) << ',' << fmt(i.std) << ',' << fmt(o.mean) << ',' << fmt(o.std) << '\n';
        }
    }
}

}  // namespace alvinlab
