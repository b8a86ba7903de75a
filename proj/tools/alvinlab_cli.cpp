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

// alvinlab command line: gen-data, run, bench-select, report.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alvinlab.h"

namespace {

struct ConfigDeleter {
    void operator()(alab_config* c) const { alab_config_free(c); }
};
using ConfigPtr = std::unique_ptr<alab_config, ConfigDeleter>;

int report_failure(alab_status s) {
    std::cerr << "alvinlab: " << alab_last_error() << '\n';
    return alab_exit_code(s);
}

alab_status load(const std::string& path, ConfigPtr& out) {
    alab_config* raw = nullptr;
    const alab_status s = alab_config_from_file(path.c_str(), &raw);
    out.reset(raw);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alvinlab: pool-based active learning lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(alab_version()));

    std::string config_path;
    std::string out_dir;
    std::string in_dir;
    std::vector<std::uint64_t> seeds;
    std::string strategy;
    std::size_t n = 100;
    std::size_t labeled = 500;
    std::size_t repeats = 3;
    std::vector<std::string> strategies;
    std::string bench_out;
    std::uint64_t data_seed = 0;
    bool data_seed_set = false;

    auto* gen = app.add_subcommand("gen-data", "write synthetic splits as embedding CSV plus schema");
    gen->add_option("--config", config_path, "experiment config (JSON)")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--seed", data_seed, "data seed (default: first configured seed)")
        ->each([&](const std::string&) { data_seed_set = true; });

    auto* run = app.add_subcommand("run", "run an active learning experiment");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--seeds", seeds, "comma-separated seeds (overrides seeds)")->delimiter(',');
    run->add_option("--strategy", strategy, "strategy id (overrides strategy)");

    auto* bench = app.add_subcommand("bench-select", "time one selection per strategy");
    bench->add_option("--config", config_path, "experiment config (JSON)")->required();
    bench->add_option("--n", n, "instances to select")->capture_default_str();
    bench->add_option("--labeled", labeled, "labeled examples the model is trained on")->capture_default_str();
    bench->add_option("--repeats", repeats, "timed calls per strategy; the median is reported")
        ->capture_default_str();
    bench->add_option("--strategies", strategies, "comma-separated strategy ids (default: all)")->delimiter(',');
    bench->add_option("--out", bench_out, "also write the table to this CSV file");

    auto* report = app.add_subcommand("report", "summaries and learning-curve CSVs");
    report->add_option("--in", in_dir, "directory holding run results")->required();
    report->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*report) {
        const alab_status s = alab_report(in_dir.c_str(), out_dir.c_str());
        if (s != ALAB_OK) {
            return report_failure(s);
        }
        std::cout << "wrote summary.csv, learning_curve.csv, minority_recall.csv, timing.csv to " << out_dir << '\n';
        return 0;
    }

    ConfigPtr cfg;
    if (alab_status s = load(config_path, cfg); s != ALAB_OK) {
        return report_failure(s);
    }

    if (*gen) {
        if (!data_seed_set) {
            if (alab_status s = alab_config_seed(cfg.get(), 0, &data_seed); s != ALAB_OK) {
                return report_failure(s);
            }
        }
        if (alab_status s = alab_generate_data(cfg.get(), data_seed, out_dir.c_str()); s != ALAB_OK) {
            return report_failure(s);
        }
        std::cout << "wrote train, id_test, ood_test to " << out_dir << '\n';
        return 0;
    }

    if (*run) {
        if (!out_dir.empty()) {
            if (alab_status s = alab_config_set_output_dir(cfg.get(), out_dir.c_str()); s != ALAB_OK) {
                return report_failure(s);
            }
        }
        if (!seeds.empty()) {
            if (alab_status s = alab_config_set_seeds(cfg.get(), seeds.data(), seeds.size()); s != ALAB_OK) {
                return report_failure(s);
            }
        }
        if (!strategy.empty()) {
            if (alab_status s = alab_config_set_strategy(cfg.get(), strategy.c_str()); s != ALAB_OK) {
                return report_failure(s);
            }
        }
        if (alab_status s = alab_run_experiment(cfg.get()); s != ALAB_OK) {
            return report_failure(s);
        }
        return 0;
    }

    std::vector<const char*> names;
    for (const auto& s : strategies) {
        names.push_back(s.c_str());
    }
    alab_bench* raw = nullptr;
    if (alab_status s = alab_bench_select(cfg.get(), names.data(), names.size(), n, labeled, repeats, &raw);
        s != ALAB_OK) {
        return report_failure(s);
    }
    std::unique_ptr<alab_bench, void (*)(alab_bench*)> result(raw, alab_bench_free);
    std::string table = "strategy,seconds\n";
    for (std::size_t i = 0; i < alab_bench_count(result.get()); ++i) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s,%.6f\n", alab_bench_strategy(result.get(), i),
                      alab_bench_seconds(result.get(), i));
        table += line;
    }
    std::cout << table;
    if (!bench_out.empty()) {
        std::ofstream f(bench_out);
        if (!f) {
            std::cerr << "alvinlab: cannot write " << bench_out << '\n';
            return 3;
        }
        f << table;
    }
    return 0;
}
