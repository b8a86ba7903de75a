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

#include "alvinlab.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "alvinlab/dynamics.hpp"
#include "alvinlab/error.hpp"
#include "alvinlab/harness.hpp"

struct alab_config {
    alvinlab::ExperimentConfig cfg;
};

struct alab_bench {
    std::vector<std::string> names;
    std::vector<double> seconds;
};

namespace {

thread_local std::string g_last_error;

alab_status fail(alab_status s, const char* what) {
    g_last_error = what;
    return s;
}

template <class F>
alab_status guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return ALAB_OK;
    } catch (const alvinlab::ConfigError& e) {
        return fail(ALAB_ERR_CONFIG, e.what());
    } catch (const alvinlab::ParseError& e) {
        return fail(ALAB_ERR_PARSE, e.what());
    } catch (const alvinlab::UsageError& e) {
        return fail(ALAB_ERR_USAGE, e.what());
    } catch (const alvinlab::DegenerateInputError& e) {
        return fail(ALAB_ERR_DEGENERATE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(ALAB_ERR_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return fail(ALAB_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(ALAB_ERR_RUNTIME, "unknown error");
    }
}

#define ALAB_REQUIRE(cond, msg)                     \
    do {                                            \
        if (!(cond)) {                              \
            return fail(ALAB_ERR_USAGE, msg);       \
        }                                           \
    } while (0)

}  // namespace

extern "C" {

const char* alab_version(void) {
    return "0.1.0";
}

const char* alab_last_error(void) {
    return g_last_error.c_str();
}

int alab_exit_code(alab_status status) {
    switch (status) {
        case ALAB_OK:
            return 0;
        case ALAB_ERR_USAGE:
        case ALAB_ERR_CONFIG:
            return 2;
        default:
            return 3;
    }
}

alab_status alab_config_from_file(const char* path, alab_config** out) {
    ALAB_REQUIRE(path && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new alab_config{alvinlab::load_config(path)}; });
}

alab_status alab_config_from_json(const char* json, alab_config** out) {
    ALAB_REQUIRE(json && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new alab_config{alvinlab::parse_config(json)}; });
}

void alab_config_free(alab_config* cfg) {
    delete cfg;
}

alab_status alab_config_set_strategy(alab_config* cfg, const char* strategy) {
    ALAB_REQUIRE(cfg && strategy, "null argument");
    return guarded([&] {
        try {
            cfg->cfg.strategy = alvinlab::parse_strategy(strategy);
        } catch (const alvinlab::UsageError& e) {
            throw alvinlab::ConfigError(e.what());
        }
    });
}

alab_status alab_config_set_seeds(alab_config* cfg, const uint64_t* seeds, size_t count) {
    ALAB_REQUIRE(cfg && (seeds || count == 0), "null argument");
    if (count == 0) {
        return fail(ALAB_ERR_CONFIG, "seeds must list at least one seed");
    }
    return guarded([&] { cfg->cfg.seeds.assign(seeds, seeds + count); });
}

alab_status alab_config_set_output_dir(alab_config* cfg, const char* dir) {
    ALAB_REQUIRE(cfg && dir, "null argument");
    return guarded([&] { cfg->cfg.output_dir = dir; });
}

size_t alab_config_seed_count(const alab_config* cfg) {
    return cfg ? cfg->cfg.seeds.size() : 0;
}

alab_status alab_config_seed(const alab_config* cfg, size_t i, uint64_t* out) {
    ALAB_REQUIRE(cfg && out, "null argument");
    ALAB_REQUIRE(i < cfg->cfg.seeds.size(), "seed index out of range");
    *out = cfg->cfg.seeds[i];
    return ALAB_OK;
}

alab_status alab_config_to_json(const alab_config* cfg, char** out) {
    ALAB_REQUIRE(cfg && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        const std::string s = alvinlab::config_to_json(cfg->cfg);
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out = buf;
    });
}

void alab_string_free(char* s) {
    delete[] s;
}

alab_status alab_generate_data(const alab_config* cfg, uint64_t seed, const char* out_dir) {
    ALAB_REQUIRE(cfg && out_dir, "null argument");
    if (!cfg->cfg.synthetic) {
        return fail(ALAB_ERR_CONFIG, "gen-data needs a synthetic dataset config");
    }
    return guarded([&] {
        namespace fs = std::filesystem;
        using namespace alvinlab;
        numkit::Rng root(seed);
        numkit::Rng data_rng = root.child(1);
        const LoadedData d = load_data(cfg->cfg, data_rng);
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        for (const DatasetSplit* s : {&d.train, &d.id_test, &d.ood_test}) {
            const std::string name(to_string(s->role()));
            write_embedding_dataset(dir / (name + ".csv"), *s);
            write_schema(dir / (name + ".schema.json"), EmbeddingSchema{s->num_classes(), s->dimension(), s->role()});
        }
    });
}

alab_status alab_run_experiment(const alab_config* cfg) {
    ALAB_REQUIRE(cfg, "null argument");
    return guarded([&] { alvinlab::run_experiment(cfg->cfg); });
}

alab_status alab_bench_select(const alab_config* cfg, const char* const* strategies, size_t strategy_count, size_t n,
                              size_t labeled, size_t repeats, alab_bench** out) {
    ALAB_REQUIRE(cfg && out && (strategies || strategy_count == 0), "null argument");
    *out = nullptr;
    return guarded([&] {
        std::vector<alvinlab::StrategyId> ids;
        if (strategy_count == 0) {
            ids.assign(alvinlab::kAllStrategies.begin(), alvinlab::kAllStrategies.end());
        }
        for (size_t i = 0; i < strategy_count; ++i) {
            ids.push_back(alvinlab::parse_strategy(strategies[i]));
        }
        const auto entries = alvinlab::time_selection(cfg->cfg, ids, n, labeled, repeats);
        auto* b = new alab_bench;
        for (const auto& e : entries) {
            b->names.emplace_back(alvinlab::to_string(e.strategy));
            b->seconds.push_back(e.seconds);
        }
        *out = b;
    });
}

size_t alab_bench_count(const alab_bench* bench) {
    return bench ? bench->names.size() : 0;
}

const char* alab_bench_strategy(const alab_bench* bench, size_t i) {
    return bench && i < bench->names.size() ? bench->names[i].c_str() : nullptr;
}

double alab_bench_seconds(const alab_bench* bench, size_t i) {
    return bench && i < bench->seconds.size() ? bench->seconds[i] : -1.0;
}

void alab_bench_free(alab_bench* bench) {
    delete bench;
}

alab_status alab_report(const char* in_dir, const char* out_dir) {
    ALAB_REQUIRE(in_dir && out_dir, "null argument");
    return guarded([&] {
        const auto runs = alvinlab::load_runs(in_dir);
        if (runs.empty()) {
            throw alvinlab::UsageError(std::string("no seed_*.jsonl results under ") + in_dir);
        }
        alvinlab::write_report(runs, out_dir);
    });
}

alab_status alab_infer_min_maj(const uint8_t* bits, size_t n_examples, size_t epochs, uint8_t* out_minority) {
    ALAB_REQUIRE(bits && out_minority, "null argument");
    ALAB_REQUIRE(n_examples > 0 && epochs > 0, "trace must be non-empty");
    return guarded([&] {
        for (size_t i = 0; i < n_examples; ++i) {
            const auto g = alvinlab::classify_trace({bits + i * epochs, epochs});
            out_minority[i] = g == alvinlab::Group::minority ? 1 : 0;
        }
    });
}

}  // extern "C"
