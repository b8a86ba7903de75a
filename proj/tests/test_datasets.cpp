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


#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "alvinlab/datasets.hpp"
#include "alvinlab/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace alvinlab;
using numkit::Rng;

namespace {

ShortcutConfig sized(std::size_t train, std::size_t id, std::size_t ood) {
    ShortcutConfig cfg;
    cfg.train_size = train;
    cfg.id_test_size = id;
    cfg.ood_test_size = ood;
    return cfg;
}

std::size_t shortcut_code(const ShortcutConfig& cfg, const Example& e) {
    std::size_t best = 0;
    for (std::size_t d = 1; d < cfg.shortcut_dim; ++d) {
        if (e.features[cfg.core_dim + d] > e.features[cfg.core_dim + best]) best = d;
    }
    return best;
}

double group_fraction(const DatasetSplit& s, Group g) {
    std::size_t n = 0;
    for (const auto& e : s.examples()) n += e.group == g ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(s.size());
}

std::string csv_of(const DatasetSplit& s) {
    std::ostringstream out;
    write_embedding_dataset(out, s);
    return out.str();
}

void expect_parse_error_at(const std::string& text, std::size_t line, EmbeddingSchema schema) {
    std::istringstream in(text);
    try {
        (void)load_embedding_dataset(in, schema);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == line);
    }
}

}  // namespace

TEST_SUITE("datasets") {

TEST_CASE("split validation") {
    using testutil::ex;
    CHECK_THROWS_AS(DatasetSplit({}, 2, SplitRole::train), UsageError);
    CHECK_THROWS_AS(DatasetSplit({ex(0, {1.0}, 2)}, 2, SplitRole::train), UsageError);
    CHECK_THROWS_AS(DatasetSplit({ex(0, {1.0}, 0), ex(0, {2.0}, 1)}, 2, SplitRole::train), UsageError);
    CHECK_THROWS_AS(DatasetSplit({ex(0, {1.0}, 0), ex(1, {2.0, 3.0}, 1)}, 2, SplitRole::train), UsageError);
    const DatasetSplit s({ex(5, {1.0}, 0), ex(9, {2.0}, 1)}, 2, SplitRole::train);
    CHECK(s.at(9).label == 1);
    CHECK(s.position(9) == 1);
    CHECK_THROWS_AS(s.at(4), UsageError);
}

TEST_CASE("config validation") {
    ShortcutConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.majority_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = cfg;
    bad.train_size = 1;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = cfg;
    bad.shortcut_dim = 1;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = cfg;
    bad.noise_std = -0.1;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = cfg;
    bad.ood_majority_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("majority_fraction 1 tags every train example majority") {
    auto cfg = sized(500, 100, 100);
    cfg.majority_fraction = 1.0;
    Rng rng(1);
    const auto d = generate_shortcut_dataset(cfg, rng);
    for (const auto& e : d.train.examples()) REQUIRE(e.group == Group::majority);
    CHECK(group_fraction(d.ood_test, Group::minority) == 1.0);
}

TEST_CASE("shortcut block encodes the label for majority and another class for minority") {
    const auto cfg = sized(10000, 100, 100);
    Rng rng(2);
    const auto d = generate_shortcut_dataset(cfg, rng);
    std::size_t maj = 0, maj_agree = 0, min = 0, min_agree = 0;
    for (const auto& e : d.train.examples()) {
        const bool agree = shortcut_code(cfg, e) == e.label;
        if (e.group == Group::majority) {
            ++maj;
            maj_agree += agree;
        } else {
            ++min;
            min_agree += agree;
        }
    }
    CHECK(static_cast<double>(maj_agree) / maj >= 0.99);
    CHECK(static_cast<double>(min_agree) / min <= 0.1);
}

TEST_CASE("minority shortcut codes are uniform over the other classes") {
    auto cfg = sized(9000, 30, 30);
    cfg.num_classes = 3;
    cfg.shortcut_dim = 3;
    cfg.noise_std = 0.0;
    cfg.majority_fraction = 0.5;
    Rng rng(3);
    const auto d = generate_shortcut_dataset(cfg, rng);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    for (const auto& e : d.train.examples()) {
        if (e.group == Group::minority) {
            const auto code = shortcut_code(cfg, e);
            REQUIRE(code != e.label);
            ++counts[{e.label, code}];
        }
    }
    for (const auto& [key, n] : counts) CHECK(std::abs(static_cast<double>(n) / 750.0 - 1.0) < 0.12);
}

TEST_CASE("core block alone is linearly separable to 95%") {
    const auto cfg = sized(10000, 100, 100);
    Rng rng(4);
    const auto d = generate_shortcut_dataset(cfg, rng);
    std::size_t ok = 0;
    for (const auto& e : d.train.examples()) {
        // Class means sit on distinct core axes, so the linear rule is argmax over those axes.
        std::size_t best = 0;
        for (std::size_t c = 1; c < cfg.num_classes; ++c) {
            if (e.features[c] > e.features[best]) best = c;
        }
        ok += best == e.label;
    }
    CHECK(static_cast<double>(ok) / d.train.size() >= 0.95);
}

TEST_CASE("group proportions per split") {
    const auto cfg = sized(5000, 2000, 2000);
    Rng rng(5);
    const auto d = generate_shortcut_dataset(cfg, rng);
    for (ClassLabel c = 0; c < cfg.num_classes; ++c) {
        std::size_t n = 0, maj = 0;
        for (const auto& e : d.train.examples()) {
            if (e.label == c) {
                ++n;
                maj += e.group == Group::majority;
            }
        }
        CHECK(std::abs(static_cast<double>(maj) / n - cfg.majority_fraction) <= 0.02);
    }
    CHECK(std::abs(group_fraction(d.id_test, Group::majority) - 0.9) <= 0.01);
    CHECK(std::abs(group_fraction(d.ood_test, Group::minority) - (1.0 - cfg.effective_ood_majority_fraction())) <=
          0.01);

    auto shifted = cfg;
    shifted.ood_majority_fraction = 0.3;
    Rng rng2(5);
    const auto d2 = generate_shortcut_dataset(shifted, rng2);
    CHECK(std::abs(group_fraction(d2.ood_test, Group::minority) - 0.7) <= 0.01);
}

TEST_CASE("split ids are unique across splits and roles are set") {
    const auto cfg = sized(300, 100, 100);
    Rng rng(6);
    const auto d = generate_shortcut_dataset(cfg, rng);
    CHECK(d.train.role() == SplitRole::train);
    CHECK(d.id_test.role() == SplitRole::id_test);
    CHECK(d.ood_test.role() == SplitRole::ood_test);
    for (const auto& e : d.id_test.examples()) CHECK_FALSE(d.train.contains(e.id));
    for (const auto& e : d.ood_test.examples()) CHECK_FALSE(d.id_test.contains(e.id));
    CHECK(d.train.dimension() == cfg.core_dim + cfg.shortcut_dim);
}

TEST_CASE("generation is bit-identical for the same seed") {
    const auto cfg = sized(1000, 200, 200);
    Rng a(77), b(77), c(78);
    const auto da = generate_shortcut_dataset(cfg, a);
    const auto db = generate_shortcut_dataset(cfg, b);
    const auto dc = generate_shortcut_dataset(cfg, c);
    CHECK(da.train == db.train);
    CHECK(da.ood_test == db.ood_test);
    CHECK(csv_of(da.train) == csv_of(db.train));
    CHECK_FALSE(da.train == dc.train);
}

TEST_CASE("hand-written embedding file loads exactly") {
    const std::string text =
        "id,label,group,f0,f1\n"
        "10,0,maj,1.5,-2\n"
        "11,1,min,3e-2,+4.25\n"
        "12,1,_,0,1E3\n";
    std::istringstream in(text);
    const auto s = load_embedding_dataset(in, EmbeddingSchema{2, 2, SplitRole::id_test});
    REQUIRE(s.size() == 3);
    CHECK(s.role() == SplitRole::id_test);
    CHECK(s.at(10).features.values() == std::vector<double>{1.5, -2.0});
    CHECK(s.at(10).group == Group::majority);
    CHECK(s.at(11).label == 1);
    CHECK(s.at(11).group == Group::minority);
    CHECK(s.at(11).features.values() == std::vector<double>{0.03, 4.25});
    CHECK(s.at(12).group == Group::unknown);
    CHECK(s.at(12).features[1] == 1000.0);
}

TEST_CASE("malformed files name the offending line") {
    const EmbeddingSchema schema{2, 2, SplitRole::train};
    expect_parse_error_at("id,label,group,f0,f1\n1,0,maj,1,2\n2,1,min,3\n", 3, schema);
    expect_parse_error_at("id,label,group,f0,f1\n1,0,maj,1,2\n2,1,min,3,4\n3,2,maj,0,0\n", 4, schema);
    expect_parse_error_at("id,label,group,f0,f1\n1,0,xx,1,2\n", 2, schema);
    expect_parse_error_at("id,label,group,f0,f1\n1,0,maj,1,abc\n", 2, schema);
    expect_parse_error_at("id,label,group,f0,f1\n1,0,maj,1,2\n1,1,maj,1,2\n", 3, schema);
    expect_parse_error_at("id,label,f0,f1\n1,0,1,2\n", 1, schema);
    expect_parse_error_at("id,label,group,f0,f1\n", 1, schema);
    expect_parse_error_at("id,label,group,f0,f1\n1,0,maj,1,inf\n", 2, schema);
}

TEST_CASE("write then read reproduces a generated split field for field") {
    const auto cfg = sized(1000, 100, 100);
    Rng rng(8);
    const auto d = generate_shortcut_dataset(cfg, rng);
    const auto dir = testutil::scratch_dir("datasets_roundtrip");
    write_embedding_dataset(dir / "train.csv", d.train);
    write_schema(dir / "train.schema.json", EmbeddingSchema{2, d.train.dimension(), SplitRole::train});
    const auto schema = read_schema(dir / "train.schema.json");
    CHECK(schema.num_classes == 2);
    CHECK(schema.dimension == d.train.dimension());
    const auto loaded = load_embedding_dataset(dir / "train.csv");
    CHECK(loaded == d.train);
}

TEST_CASE("schema errors") {
    const auto dir = testutil::scratch_dir("datasets_schema");
    std::ofstream(dir / "bad.schema.json") << "{\"num_classes\": 0, \"dimension\": 3, \"role\": \"train\"}";
    CHECK_THROWS_AS(read_schema(dir / "bad.schema.json"), ParseError);
    std::ofstream(dir / "junk.schema.json") << "not json";
    CHECK_THROWS_AS(read_schema(dir / "junk.schema.json"), ParseError);
    CHECK_THROWS_AS(read_schema(dir / "missing.schema.json"), UsageError);
}

TEST_CASE("seed set with exactly C examples covers every class") {
    // 1000 examples, 99% of them class 0: a plain draw of two usually misses class 1.
    std::vector<Example> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(testutil::ex(i, {double(i)}, i < 990 ? 0 : 1));
    const DatasetSplit train(std::move(xs), 2, SplitRole::train);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto pool = init_pool(train, 0.002, rng);
        REQUIRE(pool.labeled.size() == 2);
        std::set<ClassLabel> classes;
        for (auto id : pool.labeled) classes.insert(train.at(id).label);
        REQUIRE(classes.size() == 2);
        audit_pool(pool, train);
    }
}

TEST_CASE("init_pool partitions and is deterministic") {
    const auto train = testutil::random_split(3000, 4, 3, 9);
    Rng a(10), b(10);
    const auto pa = init_pool(train, 0.001, a);
    const auto pb = init_pool(train, 0.001, b);
    CHECK(pa.labeled == pb.labeled);
    CHECK(pa.labeled.size() == seed_count(3000, 3, 0.001));
    CHECK(pa.labeled.size() == 3);
    CHECK(pa.labeled.size() + pa.unlabeled.size() == train.size());
    audit_pool(pa, train);
    Rng c(1);
    CHECK_THROWS_AS(init_pool(train, 0.0, c), UsageError);
    CHECK_THROWS_AS(init_pool(train, 1.0, c), UsageError);
}

TEST_CASE("init_pool draws from id order, not storage order") {
    auto xs = testutil::random_split(500, 3, 2, 11).examples();
    const DatasetSplit fwd(xs, 2, SplitRole::train);
    std::reverse(xs.begin(), xs.end());
    const DatasetSplit rev(xs, 2, SplitRole::train);
    Rng a(12), b(12);
    CHECK(init_pool(fwd, 0.02, a).labeled == init_pool(rev, 0.02, b).labeled);
}

TEST_CASE("annotate moves ids and logs the round") {
    const auto train = testutil::random_split(100, 2, 2, 13);
    Rng rng(14);
    auto pool = init_pool(train, 0.05, rng);
    const auto before = pool;
    pool = annotate(pool, std::vector<ExampleId>{});
    CHECK(pool.labeled == before.labeled);
    CHECK(pool.round_log.size() == 1);
    CHECK(pool.round_log[0].empty());

    const ExampleId first = *pool.unlabeled.begin();
    pool = annotate(pool, std::vector<ExampleId>{first});
    CHECK(pool.labeled.contains(first));
    CHECK_FALSE(pool.unlabeled.contains(first));
    CHECK_THROWS_AS(annotate(pool, std::vector<ExampleId>{first}), UsageError);
    CHECK_THROWS_AS(annotate(pool, std::vector<ExampleId>{12345}), UsageError);
    const ExampleId next = *pool.unlabeled.begin();
    CHECK_THROWS_AS(annotate(pool, std::vector<ExampleId>{next, next}), UsageError);

    const std::vector<ExampleId> rest(pool.unlabeled.begin(), pool.unlabeled.end());
    pool = annotate(pool, rest);
    CHECK(pool.unlabeled.empty());
    audit_pool(pool, train);
}

TEST_CASE("partition invariant holds over random rounds") {
    const auto train = testutil::random_split(400, 2, 2, 15);
    Rng rng(16);
    auto pool = init_pool(train, 0.01, rng);
    for (int r = 0; r < 10; ++r) {
        std::vector<ExampleId> un(pool.unlabeled.begin(), pool.unlabeled.end());
        std::vector<ExampleId> batch;
        for (auto idx : numkit::sample_without_replacement(un.size(), 1 + rng.uniform_index(20), rng)) {
            batch.push_back(un[idx]);
        }
        pool = annotate(pool, batch);
        audit_pool(pool, train);
        for (auto id : pool.labeled) REQUIRE_FALSE(pool.unlabeled.contains(id));
    }
    std::set<ExampleId> replay(pool.seed_ids.begin(), pool.seed_ids.end());
    for (const auto& round : pool.round_log) replay.insert(round.begin(), round.end());
    CHECK(replay == pool.labeled);
}

TEST_CASE("audit catches a corrupted pool") {
    const auto train = testutil::random_split(50, 2, 2, 17);
    Rng rng(18);
    auto pool = init_pool(train, 0.1, rng);
    auto broken = pool;
    broken.unlabeled.insert(*pool.labeled.begin());
    CHECK_THROWS_AS(audit_pool(broken, train), RuntimeFailure);
    broken = pool;
    broken.unlabeled.erase(broken.unlabeled.begin());
    CHECK_THROWS_AS(audit_pool(broken, train), RuntimeFailure);
    broken = pool;
    const ExampleId moved = *broken.unlabeled.begin();
    broken.unlabeled.erase(moved);
    broken.labeled.insert(moved);  // labeled without a logged round
    CHECK_THROWS_AS(audit_pool(broken, train), RuntimeFailure);
}

}  // TEST_SUITE
