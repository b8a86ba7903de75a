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


// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alvinlab.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "dataset": {"synthetic": {"train_size": 600, "id_test_size": 100, "ood_test_size": 100}},
  "strategy": "random",
  "train": {"epochs": 5},
  "budget_fraction": 0.1,
  "seed_fraction": 0.01,
  "b": 20,
  "seeds": [4, 9]
})";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("alvinlab_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Config {
    alab_config* p = nullptr;
    explicit Config(const char* json = kSmall) { REQUIRE(alab_config_from_json(json, &p) == ALAB_OK); }
    ~Config() { alab_config_free(p); }
};

}  // namespace

TEST_CASE("version and exit codes") {
    CHECK(std::strlen(alab_version()) > 0);
    CHECK(alab_exit_code(ALAB_OK) == 0);
    CHECK(alab_exit_code(ALAB_ERR_USAGE) == 2);
    CHECK(alab_exit_code(ALAB_ERR_CONFIG) == 2);
    CHECK(alab_exit_code(ALAB_ERR_RUNTIME) == 3);
    CHECK(alab_exit_code(ALAB_ERR_PARSE) == 3);
    CHECK(alab_exit_code(ALAB_ERR_DEGENERATE) == 3);
}

TEST_CASE("config errors carry a status and message") {
    alab_config* c = reinterpret_cast<alab_config*>(1);
    CHECK(alab_config_from_json(R"({"dataset": {"synthetic": {}}, "extra": 1})", &c) == ALAB_ERR_CONFIG);
    CHECK(c == nullptr);
    CHECK(std::string(alab_last_error()).find("extra") != std::string::npos);
    CHECK(alab_config_from_json("[", &c) == ALAB_ERR_CONFIG);
    CHECK(alab_config_from_file("/nonexistent/alvinlab.json", &c) == ALAB_ERR_CONFIG);
    CHECK(alab_config_from_json(nullptr, &c) == ALAB_ERR_USAGE);

    Config ok;
    CHECK(std::string(alab_last_error()).empty());
    CHECK(alab_config_set_strategy(ok.p, "nope") == ALAB_ERR_CONFIG);
    CHECK(alab_config_set_seeds(ok.p, nullptr, 0) == ALAB_ERR_CONFIG);
    std::uint64_t s = 0;
    CHECK(alab_config_seed(ok.p, 2, &s) == ALAB_ERR_USAGE);
}

TEST_CASE("config setters are reflected in the JSON form") {
    Config c;
    CHECK(alab_config_seed_count(c.p) == 2);
    std::uint64_t s = 0;
    CHECK(alab_config_seed(c.p, 1, &s) == ALAB_OK);
    CHECK(s == 9);

    const std::uint64_t seeds[] = {11, 12, 13};
    CHECK(alab_config_set_seeds(c.p, seeds, 3) == ALAB_OK);
    CHECK(alab_config_set_strategy(c.p, "alvin_ran") == ALAB_OK);
    CHECK(alab_config_set_output_dir(c.p, "somewhere") == ALAB_OK);
    CHECK(alab_config_seed_count(c.p) == 3);

    char* json = nullptr;
    REQUIRE(alab_config_to_json(c.p, &json) == ALAB_OK);
    const std::string text(json);
    alab_string_free(json);
    CHECK(text.find("\"alvin_ran\"") != std::string::npos);
    CHECK(text.find("\"somewhere\"") != std::string::npos);
    CHECK(text.find("13") != std::string::npos);

    Config again(text.c_str());
    char* json2 = nullptr;
    REQUIRE(alab_config_to_json(again.p, &json2) == ALAB_OK);
    CHECK(text == json2);
    alab_string_free(json2);
}

TEST_CASE("min/maj inference") {
    const std::uint8_t bits[] = {
        0, 0, 0, 0,  // never learned
        1, 1, 1, 1,  // always right
        0, 1, 1, 1,  // learned once
        1, 0, 1, 1,  // forgotten
        0, 1, 0, 1,  // forgotten
    };
    std::uint8_t out[5] = {9, 9, 9, 9, 9};
    REQUIRE(alab_infer_min_maj(bits, 5, 4, out) == ALAB_OK);
    CHECK(out[0] == 1);
    CHECK(out[1] == 0);
    CHECK(out[2] == 0);
    CHECK(out[3] == 1);
    CHECK(out[4] == 1);
    CHECK(alab_infer_min_maj(bits, 0, 4, out) == ALAB_ERR_USAGE);
    CHECK(alab_infer_min_maj(nullptr, 1, 4, out) == ALAB_ERR_USAGE);
}

TEST_CASE("generate, run and report") {
    const auto dir = scratch("flow");
    Config c;
    REQUIRE(alab_generate_data(c.p, 4, (dir / "data").string().c_str()) == ALAB_OK);
    for (const char* f : {"train.csv", "id_test.csv", "ood_test.csv", "train.schema.json", "id_test.schema.json",
                          "ood_test.schema.json"}) {
        CHECK(fs::exists(dir / "data" / f));
    }

    REQUIRE(alab_config_set_output_dir(c.p, (dir / "runs").string().c_str()) == ALAB_OK);
    REQUIRE(alab_run_experiment(c.p) == ALAB_OK);
    CHECK(fs::exists(dir / "runs/random/seed_4.jsonl"));
    CHECK(fs::exists(dir / "runs/random/seed_9.jsonl"));

    // Files-mode config over the generated data reproduces seed 4.
    const std::string files_json = std::string(R"({"dataset": {"files": {"train": ")") +
                                   (dir / "data/train.csv").string() + R"(", "id_test": ")" +
                                   (dir / "data/id_test.csv").string() + R"(", "ood_test": ")" +
                                   (dir / "data/ood_test.csv").string() +
                                   R"("}}, "strategy": "random", "train": {"epochs": 5}, "seed_fraction": 0.01,
                                   "b": 20, "seeds": [4], "output_dir": ")" +
                                   (dir / "files").string() + "\"}";
    Config f(files_json.c_str());
    REQUIRE(alab_run_experiment(f.p) == ALAB_OK);
    CHECK(slurp(dir / "runs/random/seed_4.jsonl") == slurp(dir / "files/random/seed_4.jsonl"));

    REQUIRE(alab_report((dir / "runs").string().c_str(), (dir / "report").string().c_str()) == ALAB_OK);
    CHECK(fs::exists(dir / "report/summary.csv"));
    CHECK(alab_report((dir / "empty").string().c_str(), (dir / "r2").string().c_str()) != ALAB_OK);
}

TEST_CASE("a diverging run reports a runtime failure") {
    Config c(R"({"dataset": {"synthetic": {"train_size": 300, "id_test_size": 50, "ood_test_size": 50}},
                 "train": {"learning_rate": 1e300, "epochs": 3}, "strategy": "random", "seed_fraction": 0.01})");
    const auto dir = scratch("fail");
    REQUIRE(alab_config_set_output_dir(c.p, dir.string().c_str()) == ALAB_OK);
    CHECK(alab_run_experiment(c.p) == ALAB_ERR_RUNTIME);
    CHECK(std::strlen(alab_last_error()) > 0);
}

TEST_CASE("bench handles") {
    Config c;
    const char* names[] = {"random", "alvin"};
    alab_bench* b = nullptr;
    REQUIRE(alab_bench_select(c.p, names, 2, 20, 100, 1, &b) == ALAB_OK);
    CHECK(alab_bench_count(b) == 2);
    CHECK(std::string(alab_bench_strategy(b, 0)) == "random");
    CHECK(std::string(alab_bench_strategy(b, 1)) == "alvin");
    CHECK(alab_bench_seconds(b, 1) >= 0.0);
    CHECK(alab_bench_strategy(b, 2) == nullptr);
    CHECK(alab_bench_seconds(b, 2) < 0.0);
    alab_bench_free(b);

    const char* bad[] = {"bald"};
    CHECK(alab_bench_select(c.p, bad, 1, 20, 100, 1, &b) == ALAB_ERR_USAGE);
    CHECK(b == nullptr);
    CHECK(alab_bench_select(c.p, names, 2, 20, 600, 1, &b) == ALAB_ERR_USAGE);
    CHECK(alab_bench_count(nullptr) == 0);
}
