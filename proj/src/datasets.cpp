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

#include "alvinlab/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "alvinlab/error.hpp"

namespace alvinlab {

using numkit::Rng;

std::string_view to_string(Group g) noexcept {
    switch (g) {
        case Group::minority:
            return "min";
        case Group::majority:
            return "maj";
        case Group::unknown:
            break;
    }
    return "_";
}

std::string_view to_string(SplitRole r) noexcept {
    switch (r) {
        case SplitRole::train:
            return "train";
        case SplitRole::id_test:
            return "id_test";
        case SplitRole::ood_test:
            return "ood_test";
    }
    return "train";
}

SplitRole parse_split_role(std::string_view s) {
    if (s == "train") return SplitRole::train;
    if (s == "id_test") return SplitRole::id_test;
    if (s == "ood_test") return SplitRole::ood_test;
    throw UsageError("unknown split role '" + std::string(s) + "'");
}

DatasetSplit::DatasetSplit(std::vector<Example> examples, std::size_t num_classes, SplitRole role)
    : examples_(std::move(examples)), num_classes_(num_classes), role_(role) {
    if (examples_.empty()) {
        throw UsageError("dataset split must be non-empty");
    }
    if (num_classes_ == 0) {
        throw UsageError("dataset split needs at least one class");
    }
    const std::size_t dim = examples_.front().features.size();
    if (dim == 0) {
        throw UsageError("dataset features must have dimension > 0");
    }
    index_.reserve(examples_.size());
    for (std::size_t i = 0; i < examples_.size(); ++i) {
        const Example& e = examples_[i];
        if (e.label >= num_classes_) {
            throw UsageError("example " + std::to_string(e.id) + " has label " + std::to_string(e.label) +
                             " >= " + std::to_string(num_classes_));
        }
        if (e.features.size() != dim) {
            throw UsageError("example " + std::to_string(e.id) + " has inconsistent dimension");
        }
        if (!index_.emplace(e.id, i).second) {
            throw UsageError("duplicate example id " + std::to_string(e.id));
        }
    }
}

const Example& DatasetSplit::at(ExampleId id) const { return examples_[position(id)]; }

std::size_t DatasetSplit::position(ExampleId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw UsageError("unknown example id " + std::to_string(id));
    }
    return it->second;
}

void ShortcutConfig::validate() const {
    if (num_classes < 2) throw UsageError("shortcut data needs at least 2 classes");
    if (core_dim < num_classes) throw UsageError("core_dim must be >= num_classes");
    if (shortcut_dim < num_classes) throw UsageError("shortcut_dim must be >= num_classes");
    if (!(majority_fraction > 0.0 && majority_fraction <= 1.0)) {
        throw UsageError("majority_fraction must lie in (0, 1]");
    }
    const double ood = effective_ood_majority_fraction();
    if (!(ood >= 0.0 && ood <= 1.0)) throw UsageError("ood_majority_fraction must lie in [0, 1]");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw UsageError("noise_std must be >= 0");
    if (!(core_margin > 0.0) || !std::isfinite(core_margin)) throw UsageError("core_margin must be > 0");
    if (!(core_std > 0.0) || !std::isfinite(core_std)) throw UsageError("core_std must be > 0");
    if (train_size < num_classes || id_test_size < num_classes || ood_test_size < num_classes) {
        throw UsageError("every split needs at least num_classes examples");
    }
}

namespace {

DatasetSplit make_split(const ShortcutConfig& cfg, std::size_t n, double majority_fraction, SplitRole role,
                        ExampleId first_id, Rng& rng) {
    const std::size_t C = cfg.num_classes;
    const std::size_t dim = cfg.core_dim + cfg.shortcut_dim;

    // Balanced class sizes with the remainder going to the lowest classes,
    // then an exact per-class majority count.
    std::vector<std::pair<ClassLabel, Group>> plan;
    plan.reserve(n);
    for (std::size_t c = 0; c < C; ++c) {
        const std::size_t n_c = n / C + (c < n % C ? 1 : 0);
        const auto n_maj = static_cast<std::size_t>(std::llround(majority_fraction * static_cast<double>(n_c)));
        for (std::size_t i = 0; i < n_c; ++i) {
            plan.emplace_back(c, i < n_maj ? Group::majority : Group::minority);
        }
    }
    numkit::shuffle(plan, rng);

    std::vector<Example> examples;
    examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [label, group] = plan[i];
        std::vector<double> x(dim, 0.0);
        for (std::size_t d = 0; d < cfg.core_dim; ++d) {
            x[d] = cfg.core_std * rng.normal();
        }
        x[label % cfg.core_dim] += cfg.core_margin * cfg.core_std;

        ClassLabel code = label;
        if (group == Group::minority) {
            code = rng.uniform_index(C - 1);
            if (code >= label) {
                ++code;
            }
        }
        for (std::size_t d = 0; d < cfg.shortcut_dim; ++d) {
            x[cfg.core_dim + d] = (d == code ? 1.0 : 0.0) + cfg.noise_std * rng.normal();
        }
        examples.push_back(Example{first_id + static_cast<ExampleId>(i), numkit::Vector(std::move(x)), label, group});
    }
    return DatasetSplit(std::move(examples), C, role);
}

}  // namespace

ShortcutDataset generate_shortcut_dataset(const ShortcutConfig& cfg, Rng& rng) {
    cfg.validate();
    Rng train_rng = rng.child(1);
    Rng id_rng = rng.child(2);
    Rng ood_rng = rng.child(3);
    return ShortcutDataset{
        make_split(cfg, cfg.train_size, cfg.majority_fraction, SplitRole::train, 0, train_rng),
        make_split(cfg, cfg.id_test_size, cfg.majority_fraction, SplitRole::id_test, 1'000'000, id_rng),
        make_split(cfg, cfg.ood_test_size, cfg.effective_ood_majority_fraction(), SplitRole::ood_test, 2'000'000,
                   ood_rng),
    };
}

EmbeddingSchema read_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open schema " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, "schema " + path.string() + ": " + e.what());
    }
    EmbeddingSchema s;
    try {
        s.num_classes = j.at("num_classes").get<std::size_t>();
        s.dimension = j.at("dimension").get<std::size_t>();
        s.role = parse_split_role(j.at("role").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, "schema " + path.string() + ": " + e.what());
    }
    if (s.num_classes == 0 || s.dimension == 0) {
        throw ParseError(1, "schema " + path.string() + ": num_classes and dimension must be positive");
    }
    return s;
}

void write_schema(const std::filesystem::path& path, const EmbeddingSchema& schema) {
    nlohmann::json j = {{"num_classes", schema.num_classes},
                        {"dimension", schema.dimension},
                        {"role", std::string(to_string(schema.role))}};
    std::ofstream out(path);
    if (!out) {
        throw UsageError("cannot write schema " + path.string());
    }
    out << j.dump(2) << '\n';
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

DatasetSplit load_embedding_dataset(std::istream& in, const EmbeddingSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(1, "missing header row");
    }
    ++line_no;
    {
        const auto header = split_csv(trim(line));
        if (header.size() != 3 + schema.dimension || trim(header[0]) != "id" || trim(header[1]) != "label" ||
            trim(header[2]) != "group") {
            throw ParseError(line_no, "header must be id,label,group,f0..f" + std::to_string(schema.dimension - 1));
        }
        for (std::size_t d = 0; d < schema.dimension; ++d) {
            if (trim(header[3 + d]) != "f" + std::to_string(d)) {
                throw ParseError(line_no, "unexpected feature column '" + std::string(header[3 + d]) + "'");
            }
        }
    }

    std::vector<Example> examples;
    std::unordered_map<ExampleId, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        const auto fields = split_csv(row);
        if (fields.size() != 3 + schema.dimension) {
            throw ParseError(line_no, "expected " + std::to_string(3 + schema.dimension) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        Example e;
        e.id = parse_number<ExampleId>(fields[0], line_no, "id");
        const auto label = parse_number<long long>(fields[1], line_no, "label");
        if (label < 0 || static_cast<std::size_t>(label) >= schema.num_classes) {
            throw ParseError(line_no, "unknown label " + std::to_string(label));
        }
        e.label = static_cast<ClassLabel>(label);
        const std::string_view g = trim(fields[2]);
        if (g == "min") {
            e.group = Group::minority;
        } else if (g == "maj") {
            e.group = Group::majority;
        } else if (g == "_" || g.empty()) {
            e.group = Group::unknown;
        } else {
            throw ParseError(line_no, "unknown group tag '" + std::string(g) + "'");
        }
        std::vector<double> x(schema.dimension);
        for (std::size_t d = 0; d < schema.dimension; ++d) {
            x[d] = parse_number<double>(fields[3 + d], line_no, "feature");
            if (!std::isfinite(x[d])) {
                throw ParseError(line_no, "non-finite feature value");
            }
        }
        e.features = numkit::Vector::unchecked(std::move(x));
        if (!seen.emplace(e.id, line_no).second) {
            throw ParseError(line_no, "duplicate id " + std::to_string(e.id));
        }
        examples.push_back(std::move(e));
    }
    if (examples.empty()) {
        throw ParseError(line_no, "no data rows");
    }
    return DatasetSplit(std::move(examples), schema.num_classes, schema.role);
}

DatasetSplit load_embedding_dataset(const std::filesystem::path& csv_path, const EmbeddingSchema& schema) {
    std::ifstream in(csv_path);
    if (!in) {
        throw UsageError("cannot open dataset " + csv_path.string());
    }
    return load_embedding_dataset(in, schema);
}

DatasetSplit load_embedding_dataset(const std::filesystem::path& csv_path) {
    auto schema_path = csv_path;
    schema_path.replace_extension(".schema.json");
    return load_embedding_dataset(csv_path, read_schema(schema_path));
}

void write_embedding_dataset(std::ostream& out, const DatasetSplit& split) {
    out << "id,label,group";
    for (std::size_t d = 0; d < split.dimension(); ++d) {
        out << ",f" << d;
    }
    out << '\n';
    char buf[64];
    for (const Example& e : split.examples()) {
        out << e.id << ',' << e.label << ',' << to_string(e.group);
        for (double v : e.features) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

void write_embedding_dataset(const std::filesystem::path& csv_path, const DatasetSplit& split) {
    std::ofstream out(csv_path);
    if (!out) {
        throw UsageError("cannot write dataset " + csv_path.string());
    }
    write_embedding_dataset(out, split);
}

std::size_t seed_count(std::size_t train_size, std::size_t num_classes, double seed_fraction) {
    const auto n = static_cast<std::size_t>(std::llround(seed_fraction * static_cast<double>(train_size)));
    return std::max(n, num_classes);
}

PoolState init_pool(const DatasetSplit& train, double seed_fraction, Rng& rng) {
    if (!(seed_fraction > 0.0 && seed_fraction < 1.0)) {
        throw UsageError("seed_fraction must lie in (0, 1)");
    }
    const std::size_t C = train.num_classes();
    const std::size_t n_seed = seed_count(train.size(), C, seed_fraction);

    // Work in id order so the draw does not depend on storage order.
    std::vector<ExampleId> ids;
    ids.reserve(train.size());
    std::map<ClassLabel, std::vector<ExampleId>> by_class;
    for (const Example& e : train.examples()) {
        ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end());
    for (ExampleId id : ids) {
        by_class[train.at(id).label].push_back(id);
    }
    if (by_class.size() < C) {
        throw UsageError("train split lacks examples of some class; cannot cover every class in the seed set");
    }
    if (n_seed >= train.size()) {
        throw UsageError("seed set would consume the whole train split");
    }

    std::vector<ExampleId> seed;
    for (std::size_t idx : numkit::sample_without_replacement(ids.size(), n_seed, rng)) {
        seed.push_back(ids[idx]);
    }

    // Coverage repair: for each missing class swap in a random member of that
    // class in place of a member of the currently most represented class.
    for (ClassLabel c = 0; c < C; ++c) {
        std::map<ClassLabel, std::size_t> counts;
        for (ExampleId id : seed) {
            ++counts[train.at(id).label];
        }
        if (counts[c] > 0) {
            continue;
        }
        ClassLabel donor = 0;
        std::size_t donor_count = 0;
        for (const auto& [label, count] : counts) {
            if (count > donor_count) {
                donor = label;
                donor_count = count;
            }
        }
        // Replace the last seed entry of the donor class.
        for (auto it = seed.rbegin(); it != seed.rend(); ++it) {
            if (train.at(*it).label == donor) {
                const auto& members = by_class[c];
                *it = members[rng.uniform_index(members.size())];
                break;
            }
        }
    }

    PoolState pool;
    pool.seed_ids = seed;
    pool.labeled.insert(seed.begin(), seed.end());
    for (ExampleId id : ids) {
        if (!pool.labeled.contains(id)) {
            pool.unlabeled.insert(id);
        }
    }
    return pool;
}

PoolState annotate(PoolState pool, std::span<const ExampleId> ids) {
    std::set<ExampleId> batch;
    for (ExampleId id : ids) {
        if (!pool.unlabeled.contains(id)) {
            throw UsageError("cannot annotate id " + std::to_string(id) +
                             (pool.labeled.contains(id) ? ": already labeled" : ": unknown id"));
        }
        if (!batch.insert(id).second) {
            throw UsageError("id " + std::to_string(id) + " appears twice in one annotation batch");
        }
    }
    for (ExampleId id : ids) {
        pool.unlabeled.erase(id);
        pool.labeled.insert(id);
    }
    pool.round_log.emplace_back(ids.begin(), ids.end());
    return pool;
}

void audit_pool(const PoolState& pool, const DatasetSplit& train) {
    for (ExampleId id : pool.labeled) {
        if (pool.unlabeled.contains(id)) {
            throw RuntimeFailure("pool audit: id " + std::to_string(id) + " is both labeled and unlabeled");
        }
        if (!train.contains(id)) {
            throw RuntimeFailure("pool audit: labeled id " + std::to_string(id) + " not in train split");
        }
    }
    for (ExampleId id : pool.unlabeled) {
        if (!train.contains(id)) {
            throw RuntimeFailure("pool audit: unlabeled id " + std::to_string(id) + " not in train split");
        }
    }
    if (pool.labeled.size() + pool.unlabeled.size() != train.size()) {
        throw RuntimeFailure("pool audit: partition does not cover the train split");
    }
    std::set<ExampleId> replay(pool.seed_ids.begin(), pool.seed_ids.end());
    std::size_t logged = pool.seed_ids.size();
    for (const auto& round : pool.round_log) {
        replay.insert(round.begin(), round.end());
        logged += round.size();
    }
    if (replay != pool.labeled || logged != pool.labeled.size()) {
        throw RuntimeFailure("pool audit: seed set plus round log does not reproduce the labeled set");
    }
}

std::vector<Example> labeled_examples(const PoolState& pool, const DatasetSplit& train) {
    std::vector<Example> out;
    out.reserve(pool.labeled.size());
    for (ExampleId id : pool.labeled) {
        out.push_back(train.at(id));
    }
    return out;
}

std::vector<Example> unlabeled_examples(const PoolState& pool, const DatasetSplit& train) {
    std::vector<Example> out;
    out.reserve(pool.unlabeled.size());
    for (ExampleId id : pool.unlabeled) {
        out.push_back(train.at(id));
    }
    return out;
}

}  // namespace alvinlab
