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
#include <span>
#include <vector>

namespace alvinlab::numkit {

/// Dense real vector with finite entries and dimension > 0.
///
/// A default-constructed Vector is empty and only serves as a placeholder in
/// containers; every Vector built from values has been validated.
class Vector {
 public:
    Vector() = default;
    explicit Vector(std::vector<double> values);

    // Skips validation. Only for values produced by finite arithmetic on finite inputs.
    static Vector unchecked(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    const double* data() const noexcept { return values_.data(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }
    std::span<const double> span() const noexcept { return values_; }
    operator std::span<const double>() const noexcept { return values_; }  // NOLINT
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const Vector&, const Vector&) = default;

 private:
    std::vector<double> values_;
};

/// Row-major matrix of `rows` points in `cols` dimensions.
struct RowMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RowMatrix() = default;
    RowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data.data() + i * cols, cols}; }
    void append_row(std::span<const double> values);
};

/// xoshiro256** generator seeded through splitmix64.
///
/// The stream is fully specified so other implementations can reproduce it:
///   state[i] = splitmix64 applied four times to `seed`
///   next()   = rotl(s1 * 5, 7) * 9, followed by the xoshiro256 state update
///   uniform  = (next() >> 11) * 2^-53
/// child(stream) returns a generator seeded with
///   splitmix64_mix(seed ^ splitmix64_mix(stream + 0x9E3779B97F4A7C15))
/// and depends only on the parent's seed, never on how far it has advanced.
class Rng {
 public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1).
    double uniform() noexcept;
    // Uniform in (0, 1).
    double uniform_open() noexcept;
    // Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);
    // Standard normal via Box-Muller (one value per call).
    double normal() noexcept;

    Rng child(std::uint64_t stream) const noexcept;

 private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

/// Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(values[i - 1], values[j]);
    }
}

// k distinct indices from [0, n) via a partial Fisher-Yates shuffle, in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// No dimension check; callers guarantee equal sizes.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double sample_beta(Rng& rng, double alpha, double beta);

std::vector<double> softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);
// KL(p || q) with 0 * log(0 / q) := 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Lowest index wins ties.
std::size_t argmax(std::span<const double> values);

std::vector<std::size_t> kmeans_pp_init(const RowMatrix& points, std::size_t k, Rng& rng);

struct KMeansResult {
    RowMatrix centroids;
    std::vector<std::size_t> assignment;
    // Objective after every assignment step, starting with the initial centroids.
    std::vector<double> objective_history;
    std::size_t iterations = 0;
    bool converged = false;
};

KMeansResult lloyd_kmeans(const RowMatrix& points, std::size_t k, std::span<const std::size_t> init,
                          std::size_t max_iters);

// For each centroid, the index of the nearest point not already picked by an earlier centroid.
std::vector<std::size_t> closest_to_centroids(const RowMatrix& points, const RowMatrix& centroids);

}  // namespace alvinlab::numkit
