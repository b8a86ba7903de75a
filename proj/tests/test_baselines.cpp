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
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "alvinlab/baselines.hpp"
#include "alvinlab/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace alvinlab;
using numkit::Rng;

namespace {

double entropy_ref(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

double kl_ref(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

std::size_t argmax_ref(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<double> logits_ref(const ModelParams& p, const std::vector<double>& z) {
    std::vector<double> out(p.num_classes());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = p.cls_b[c];
        for (std::size_t h = 0; h < z.size(); ++h) out[c] += p.cls_w.data[c * z.size() + h] * z[h];
    }
    return out;
}

std::vector<double> rep(const ModelParams& p, const Example& e) {
    const auto z = encode(p, e.features);
    return {z.begin(), z.end()};
}

// Model with identity-like tanh encoder on 2-D inputs and zero classifier weights.
ModelParams flat_model(double bias0 = 0.0) {
    auto p = zero_params(2, 2, 2);
    p.enc_w.data = {1, 0, 0, 1};
    p.cls_b = {bias0, 0.0};
    return p;
}

RoundInputs inputs(const testutil::RoundFixture& f, std::size_t b) {
    return RoundInputs{f.model.params, f.train, f.pool, &f.model.trace, b, AlvinConfig{}, BaselineConfig{}};
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("strategy names round trip") {
    for (StrategyId s : kAllStrategies) CHECK(parse_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_strategy("bald"), UsageError);
}

TEST_CASE("random: whole pool, uniformity, determinism") {
    const auto train = testutil::random_split(30, 2, 2, 1);
    Rng seed_rng(2);
    const auto pool = init_pool(train, 0.1, seed_rng);
    Rng rng(3);
    auto all = select_random(pool, pool.unlabeled.size(), rng).ids;
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<ExampleId>(pool.unlabeled.begin(), pool.unlabeled.end()));
    CHECK_THROWS_AS(select_random(pool, pool.unlabeled.size() + 1, rng), UsageError);
    Rng a(4), b(4);
    CHECK(select_random(pool, 5, a).ids == select_random(pool, 5, b).ids);

    PoolState ten;
    for (ExampleId i = 0; i < 10; ++i) ten.unlabeled.insert(i);
    std::vector<int> counts(10, 0);
    Rng u(5);
    for (int t = 0; t < 10000; ++t) ++counts[static_cast<std::size_t>(select_random(ten, 1, u).ids[0])];
    for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.1) <= 0.01);
}

TEST_CASE("uncertainty: maximum-entropy point, full-sort oracle, shift invariance") {
    std::vector<Example> xs;
    for (int i = 0; i < 9; ++i) xs.push_back(testutil::ex(i, {3.0 + 0.1 * i, 0.0}, 0));
    xs.push_back(testutil::ex(9, {0.0, 0.0}, 1));
    const DatasetSplit split(xs, 2, SplitRole::train);
    auto p = flat_model();
    p.cls_w.data = {4, 0, -4, 0};
    std::vector<ExampleId> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(i);
    CHECK(select_uncertainty(make_pool_view(p, ids, split), 1).ids == std::vector<ExampleId>{9});

    const testutil::RoundFixture f(300, 200, 6);
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    REQUIRE(view.size() == 100);
    std::vector<std::pair<double, ExampleId>> oracle;
    for (ExampleId id : view.ids) oracle.emplace_back(-entropy_ref(predict_proba(f.model.params, f.train.at(id).features)), id);
    std::sort(oracle.begin(), oracle.end());
    const auto got = select_uncertainty(view, 30).ids;
    for (std::size_t i = 0; i < 30; ++i) CHECK(got[i] == oracle[i].second);

    auto shifted = f.model.params;
    for (double& b : shifted.cls_b) b += 3.7;
    CHECK(select_uncertainty(make_pool_view(shifted, f.pool, f.train), 30).ids == got);
    CHECK_THROWS_AS(select_uncertainty(view, 101), UsageError);
}

TEST_CASE("badge: b=1, identical embeddings, separated clusters") {
    std::vector<Example> xs;
    Rng jitter(7);
    for (int i = 0; i < 40; ++i) {
        const bool a = i < 20;
        xs.push_back(testutil::ex(i, {a ? 3.0 : 0.01 * jitter.normal(), a ? 0.01 * jitter.normal() : 3.0}, 0));
    }
    const DatasetSplit split(xs, 2, SplitRole::train);
    const auto p = flat_model();
    std::vector<ExampleId> ids;
    for (int i = 0; i < 40; ++i) ids.push_back(i);
    const auto view = make_pool_view(p, ids, split);

    int both = 0;
    Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
        const auto b = select_badge(p, view, split, 2, rng).ids;
        REQUIRE(b.size() == 2);
        both += ((b[0] < 20) != (b[1] < 20)) ? 1 : 0;
    }
    CHECK(both >= 950);

    std::vector<int> first(40, 0);
    for (int t = 0; t < 4000; ++t) ++first[static_cast<std::size_t>(select_badge(p, view, split, 1, rng).ids[0])];
    double chi2 = 0.0;
    for (int c : first) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
    CHECK(chi2 < 62.43);  // chi-square, 39 dof, 1% level

    std::vector<Example> same;
    for (int i = 0; i < 10; ++i) same.push_back(testutil::ex(i, {1.0, 1.0}, 0));
    const DatasetSplit flat(same, 2, SplitRole::train);
    std::vector<ExampleId> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(i);
    const auto b = select_badge(p, make_pool_view(p, ten, flat), flat, 6, rng).ids;
    CHECK(std::set<ExampleId>(b.begin(), b.end()).size() == 6);
}

TEST_CASE("embed_kmeans: b=1 picks the point nearest the mean, blobs get one pick each") {
    const testutil::RoundFixture f(200, 50, 9);
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    std::vector<double> mean(view.reps.cols, 0.0);
    for (std::size_t i = 0; i < view.size(); ++i)
        for (std::size_t h = 0; h < view.reps.cols; ++h) mean[h] += view.reps.row(i)[h] / view.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < view.size(); ++i) {
        if (numkit::squared_distance(view.reps.row(i), mean) < numkit::squared_distance(view.reps.row(best), mean)) best = i;
    }
    Rng rng(10);
    CHECK(select_embed_kmeans(view, 1, 100, rng).ids == std::vector<ExampleId>{view.ids[best]});

    const auto b = select_embed_kmeans(view, 40, 100, rng).ids;
    CHECK(std::set<ExampleId>(b.begin(), b.end()).size() == 40);

    std::vector<Example> xs;
    Rng jitter(11);
    for (int i = 0; i < 30; ++i) {
        const bool a = i % 2 == 0;
        xs.push_back(testutil::ex(i, {(a ? 2.0 : -2.0) + 0.02 * jitter.normal(), 0.02 * jitter.normal()}, 0));
    }
    const DatasetSplit split(xs, 2, SplitRole::train);
    std::vector<ExampleId> ids;
    for (int i = 0; i < 30; ++i) ids.push_back(i);
    const auto blobs = make_pool_view(flat_model(), ids, split);
    for (int t = 0; t < 50; ++t) {
        const auto pick = select_embed_kmeans(blobs, 2, 100, rng).ids;
        REQUIRE((pick[0] % 2) != (pick[1] % 2));
    }
}

TEST_CASE("cal: zero score for a copy of its neighbours, oracle scores and order, clamped k") {
    const testutil::RoundFixture f(110, 60, 12);
    const auto labeled = f.labeled_examples();
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    REQUIRE(view.size() == 50);
    for (std::size_t k : {1, 10, 60, 500}) {
        const auto scores = cal_scores(f.model.params, labeled, view, k);
        const std::size_t kk = std::min(k, labeled.size());
        std::vector<std::pair<double, ExampleId>> ranked;
        for (std::size_t i = 0; i < view.size(); ++i) {
            const auto& x = f.train.at(view.ids[i]);
            const auto zx = rep(f.model.params, x);
            const auto px = predict_proba(f.model.params, x.features);
            std::vector<std::pair<double, ExampleId>> nn;
            for (const auto& l : labeled) nn.emplace_back(numkit::euclidean_distance(zx, rep(f.model.params, l)), l.id);
            std::sort(nn.begin(), nn.end());
            double s = 0.0;
            for (std::size_t j = 0; j < kk; ++j) s += kl_ref(predict_proba(f.model.params, f.train.at(nn[j].second).features), px);
            s /= static_cast<double>(kk);
            REQUIRE(std::abs(scores[i] - s) < 1e-12);
            ranked.emplace_back(-s, view.ids[i]);
        }
        std::sort(ranked.begin(), ranked.end());
        const auto batch = select_cal(f.model.params, labeled, view, 20, k).ids;
        for (std::size_t i = 0; i < 20; ++i) CHECK(batch[i] == ranked[i].second);
    }

    // A pool point identical to every labeled example scores 0.
    std::vector<Example> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(testutil::ex(i, {0.3, -0.2}, 0));
    xs.push_back(testutil::ex(4, {0.3, -0.2}, 1));
    const DatasetSplit split(xs, 2, SplitRole::train);
    const std::vector<Example> lab(xs.begin(), xs.begin() + 4);
    const auto v = make_pool_view(flat_model(0.4), std::vector<ExampleId>{4}, split);
    CHECK(cal_scores(flat_model(0.4), lab, v, 10)[0] == 0.0);
    CHECK_THROWS_AS(cal_scores(flat_model(), std::vector<Example>{}, v, 10), UsageError);
}

TEST_CASE("alfa-mix: candidate flags equal brute-force grid evaluation") {
    const testutil::RoundFixture f(110, 60, 13, 3);
    const auto labeled = f.labeled_examples();
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.6, 0.9};
    const auto flags = alfa_mix_candidates(f.model.params, labeled, view, grid);
    const auto& p = f.model.params;
    const std::size_t H = p.hidden_dim();
    std::vector<std::vector<double>> anchors(2, std::vector<double>(H, 0.0));
    std::vector<double> counts(2, 0.0);
    for (const auto& e : labeled) {
        const auto z = rep(p, e);
        for (std::size_t h = 0; h < H; ++h) anchors[e.label][h] += z[h];
        counts[e.label] += 1.0;
    }
    for (int c = 0; c < 2; ++c)
        for (double& v : anchors[c]) v /= counts[c];
    std::size_t n_flagged = 0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto z = rep(p, f.train.at(view.ids[i]));
        bool flag = false;
        for (int c = 0; c < 2; ++c) {
            const auto anchor_pred = argmax_ref(logits_ref(p, anchors[c]));
            for (double l : grid) {
                std::vector<double> mix(H);
                for (std::size_t h = 0; h < H; ++h) mix[h] = l * z[h] + (1 - l) * anchors[c][h];
                flag = flag || argmax_ref(logits_ref(p, mix)) != anchor_pred;
            }
        }
        REQUIRE(flags[i] == flag);
        n_flagged += flag;
    }
    CHECK(n_flagged > 0);
    CHECK(n_flagged < view.size());
}

TEST_CASE("alfa-mix: a constant predictor has no candidates and tops up by uncertainty") {
    const testutil::RoundFixture f(110, 60, 14);
    auto p = f.model.params;
    std::fill(p.cls_w.data.begin(), p.cls_w.data.end(), 0.0);
    p.cls_b = {5.0, 0.0};
    const auto labeled = f.labeled_examples();
    const auto view = make_pool_view(p, f.pool, f.train);
    const std::vector<double> grid{0.1, 0.2, 0.3};
    const auto flags = alfa_mix_candidates(p, labeled, view, grid);
    CHECK(std::none_of(flags.begin(), flags.end(), [](bool b) { return b; }));
    Rng rng(15);
    CHECK(select_alfa_mix(p, labeled, view, 12, grid, 100, rng).ids == select_uncertainty(view, 12).ids);
}

TEST_CASE("alfa-mix needs every class labeled") {
    const testutil::RoundFixture f(110, 60, 16);
    std::vector<Example> one_class;
    for (const auto& e : f.labeled_examples()) {
        if (e.label == 0) one_class.push_back(e);
    }
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    const std::vector<double> grid{0.1};
    CHECK_THROWS_AS(alfa_mix_candidates(f.model.params, one_class, view, grid), UsageError);
}

TEST_CASE("alvin variants: uni covers I exactly when |I| == b") {
    const testutil::RoundFixture f(300, 60, 17);
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    const auto labeled = f.labeled_examples();
    AlvinConfig cfg;
    Rng r1(18);
    const auto anchors = create_anchors(f.model.params, labeled, infer_min_maj(f.model.trace), cfg, r1);
    REQUIRE_FALSE(anchors.empty());
    const auto I = gather_candidates(anchors, view, cfg.knn_k);
    auto in = inputs(f, I.size());
    Rng r2(18);
    auto got = select_alvin_variant(StrategyId::alvin_uni, in, view, r2).ids;
    std::sort(got.begin(), got.end());
    std::vector<ExampleId> want;
    for (const auto& [id, _] : I.attracted_by) want.push_back(id);
    CHECK(got == want);
}

TEST_CASE("alvin variants: int-all anchor count and the random-pair variant ignores dynamics") {
    const testutil::RoundFixture f(300, 60, 19);
    const auto labeled = f.labeled_examples();
    DynamicsVerdict v;
    std::size_t i = 0;
    for (const auto& e : labeled) v[e.id] = (i++ % 3 == 0) ? Group::minority : Group::majority;
    std::map<std::pair<ClassLabel, Group>, std::size_t> avail;
    for (const auto& e : labeled) ++avail[{e.label, v.at(e.id)}];

    AlvinConfig cfg;
    cfg.pairing = AnchorPairing::all_pairs;
    cfg.pair_sample = 4;
    Rng rng(20);
    std::size_t expected = 0;
    for (ClassLabel c = 0; c < 2; ++c) {
        expected += std::min<std::size_t>(4, avail[{c, Group::minority}]) * std::min<std::size_t>(4, avail[{c, Group::majority}]) * 15;
    }
    CHECK(create_anchors(f.model.params, labeled, v, cfg, rng).size() == expected);

    cfg.cap_all_pairs = false;
    expected = 0;
    for (ClassLabel c = 0; c < 2; ++c) expected += avail[{c, Group::minority}] * avail[{c, Group::majority}] * 15;
    CHECK(create_anchors(f.model.params, labeled, v, cfg, rng).size() == expected);

    // Without a trace the verdict-driven variants refuse to run; the random-pair variant does not need one.
    const auto view = make_pool_view(f.model.params, f.pool, f.train);
    RoundInputs no_trace{f.model.params, f.train, f.pool, nullptr, 20, AlvinConfig{}, BaselineConfig{}};
    Rng r(21);
    CHECK(select_alvin_variant(StrategyId::alvin_ran, no_trace, view, r).size() == 20);
    for (StrategyId s : {StrategyId::alvin, StrategyId::alvin_int_all, StrategyId::alvin_uni, StrategyId::alvin_kmean}) {
        CHECK_THROWS_AS(select_alvin_variant(s, no_trace, view, r), UsageError);
    }
    CHECK_THROWS_AS(select_alvin_variant(StrategyId::cal, no_trace, view, r), UsageError);

    // Random pairs never pair an example with itself and stay within the class.
    AlvinConfig ran;
    ran.pairing = AnchorPairing::random_pairs;
    for (const auto& a : create_anchors(f.model.params, labeled, DynamicsVerdict{}, ran, r)) {
        REQUIRE(a.minority_id != a.majority_id);
        REQUIRE(f.train.at(a.minority_id).label == f.train.at(a.majority_id).label);
    }
}

TEST_CASE("every strategy returns b distinct unlabeled ids deterministically") {
    const testutil::RoundFixture f(400, 60, 22);
    for (StrategyId s : kAllStrategies) {
        for (std::size_t b : {1, 25, 50}) {
            const auto in = inputs(f, b);
            Rng r1(23), r2(23);
            const auto a = select(s, in, r1);
            const auto c = select(s, in, r2);
            INFO(to_string(s) << " b=" << b);
            REQUIRE(a.size() == b);
            CHECK(std::set<ExampleId>(a.ids.begin(), a.ids.end()).size() == b);
            for (auto id : a.ids) CHECK(f.pool.unlabeled.contains(id));
            CHECK(a.ids == c.ids);
            CHECK(a.entropy.size() == b);
            CHECK(a.seconds >= 0.0);
        }
    }
}

TEST_CASE("uncertainty and the ALVIN fallback agree on identical inputs") {
    const testutil::RoundFixture f(300, 60, 24);
    PredictionTrace learned;
    learned.epochs = 2;
    for (const auto& row : f.model.trace.rows) learned.rows.push_back({row.id, {1, 1}});
    RoundInputs in{f.model.params, f.train, f.pool, &learned, 50, AlvinConfig{}, BaselineConfig{}};
    Rng r1(25), r2(25);
    const auto u = select(StrategyId::uncertainty, in, r1);
    for (StrategyId s : {StrategyId::alvin, StrategyId::alvin_int_all, StrategyId::alvin_uni, StrategyId::alvin_kmean}) {
        const auto a = select(s, in, r2);
        CHECK(a.fallback);
        CHECK(a.ids == u.ids);
    }
}

TEST_CASE("baseline config validation") {
    BaselineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.alfa_mix_grid = {};
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.alfa_mix_grid = {1.2};
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = BaselineConfig{};
    cfg.cal_neighbor_k = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}

}  // TEST_SUITE
