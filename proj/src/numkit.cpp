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

#include "alvinlab/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "alvinlab/error.hpp"

namespace alvinlab::numkit {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw UsageError(std::string(what) + ": non-finite entry");
        }
    }
}

void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw UsageError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw UsageError("vector must have dimension > 0");
    }
    require_finite(values_, "vector");
}

Vector Vector::unchecked(std::vector<double> values) {
    Vector v;
    v.values_ = std::move(values);
    return v;
}

void RowMatrix::append_row(std::span<const double> values) {
    if (rows == 0 && cols == 0) {
        cols = values.size();
    }
    if (values.size() != cols) {
        throw UsageError("row dimension mismatch");
    }
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
}

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
        s = splitmix64_mix(x);
        x += 0x9E3779B97F4A7C15ULL;
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) {
        throw UsageError("uniform_index over an empty range");
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // Rejection sampling against the largest multiple of n.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return static_cast<std::size_t>(x % bound);
}

double Rng::normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::child(std::uint64_t stream) const noexcept {
    return Rng(splitmix64_mix(seed_ ^ splitmix64_mix(stream + 0x9E3779B97F4A7C15ULL)));
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) {
        throw UsageError("cannot sample " + std::to_string(k) + " of " + std::to_string(n) + " without replacement");
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) {
        s += v * v;
    }
    return std::sqrt(s);
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    return std::sqrt(squared_distance(a, b));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw DegenerateInputError("cosine similarity of a zero-norm vector");
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

// Cheng (1978): algorithm BB when both shapes exceed 1, algorithm BC otherwise.
double sample_beta(Rng& rng, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw UsageError("Beta shapes must be positive and finite");
    }
    constexpr double kLog4 = 1.3862943611198906;
    constexpr double kLog5p1 = 2.6094379124341003;  // 1 + ln 5
    const double log_max = std::log(std::numeric_limits<double>::max());

    if (std::min(alpha, beta) > 1.0) {
        const double a = std::min(alpha, beta);
        const double b = std::max(alpha, beta);
        const double sum = a + b;
        const double bet = std::sqrt((sum - 2.0) / (2.0 * a * b - sum));
        const double gam = a + 1.0 / bet;
        for (;;) {
            const double u1 = rng.uniform_open();
            const double u2 = rng.uniform_open();
            const double v = bet * std::log(u1 / (1.0 - u1));
            const double w = v > log_max ? std::numeric_limits<double>::max() : a * std::exp(v);
            const double z = u1 * u1 * u2;
            const double r = gam * v - kLog4;
            const double s = a + r - w;
            bool accept = s + kLog5p1 >= 5.0 * z;
            if (!accept) {
                const double t = std::log(z);
                accept = s > t || r + sum * std::log(sum / (b + w)) >= t;
            }
            if (accept) {
                const double x = (a == alpha) ? w / (b + w) : b / (b + w);
                return std::clamp(x, 0.0, 1.0);
            }
        }
    }

    const double a = std::max(alpha, beta);
    const double b = std::min(alpha, beta);
    const double sum = a + b;
    const double bet = 1.0 / b;
    const double delta = 1.0 + a - b;
    const double k1 = delta * (0.0138889 + 0.0416667 * b) / (a * bet - 0.777778);
    const double k2 = 0.25 + (0.5 + 0.25 / delta) * b;
    for (;;) {
        const double u1 = rng.uniform_open();
        const double u2 = rng.uniform_open();
        double z = 0.0;
        bool skip_final_test = false;
        if (u1 < 0.5) {
            const double y = u1 * u2;
            z = u1 * y;
            if (0.25 * u2 + z - y >= k1) {
                continue;
            }
        } else {
            z = u1 * u1 * u2;
            if (z <= 0.25) {
                skip_final_test = true;
            } else if (z >= k2) {
                continue;
            }
        }
        const double v = bet * std::log(u1 / (1.0 - u1));
        const double w = v > log_max ? std::numeric_limits<double>::max() : a * std::exp(v);
        if (!skip_final_test && sum * (std::log(sum / (b + w)) + v) - kLog4 < std::log(z)) {
            continue;
        }
        const double x = (a == alpha) ? w / (b + w) : b / (b + w);
        return std::clamp(x, 0.0, 1.0);
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw UsageError("softmax of an empty vector");
    }
    require_finite(logits, "softmax");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        total += out[i];
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require_same_dim(p, q);
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            const double qi = std::max(q[i], std::numeric_limits<double>::min());
            kl += p[i] * std::log(p[i] / qi);
        }
    }
    return std::max(kl, 0.0);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> kmeans_pp_init(const RowMatrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows;
    if (k > n) {
        throw UsageError("k-means++: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
    }
    std::vector<std::size_t> chosen;
    if (k == 0) {
        return chosen;
    }
    chosen.reserve(k);
    std::vector<char> taken(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx) {
        chosen.push_back(idx);
        taken[idx] = 1;
        const auto c = points.row(idx);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
        }
    };

    take(rng.uniform_index(n));
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                total += d2[i];
            }
        }
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            std::size_t pick = n;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || d2[i] <= 0.0) {
                    continue;
                }
                last_positive = i;
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            take(pick == n ? last_positive : pick);
        } else {
            // Every remaining point coincides with a chosen one: fall back to uniform.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i]) {
                    free.push_back(i);
                }
            }
            take(free[rng.uniform_index(free.size())]);
        }
    }
    return chosen;
}

namespace {

// Returns true when any assignment changed.
bool assign_points(const RowMatrix& points, const RowMatrix& centroids, std::vector<std::size_t>& assignment,
                   std::vector<double>& dist2, double& objective) {
    bool changed = false;
    objective = 0.0;
    for (std::size_t i = 0; i < points.rows; ++i) {
        const auto p = points.row(i);
        std::size_t best = 0;
        double best_d = squared_distance(p, centroids.row(0));
        for (std::size_t c = 1; c < centroids.rows; ++c) {
            const double d = squared_distance(p, centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (assignment[i] != best) {
            changed = true;
            assignment[i] = best;
        }
        dist2[i] = best_d;
        objective += best_d;
    }
    return changed;
}

}  // namespace

KMeansResult lloyd_kmeans(const RowMatrix& points, std::size_t k, std::span<const std::size_t> init,
                          std::size_t max_iters) {
    if (k == 0) {
        throw UsageError("k-means requires k >= 1");
    }
    if (init.size() != k) {
        throw UsageError("k-means init must name exactly k points");
    }
    if (k > points.rows) {
        throw UsageError("k-means: k exceeds number of points");
    }
    {
        std::vector<std::size_t> sorted(init.begin(), init.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= points.rows) {
            throw UsageError("k-means init indices must be distinct and in range");
        }
    }

    KMeansResult res;
    res.centroids = RowMatrix(k, points.cols);
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = points.row(init[c]);
        std::copy(src.begin(), src.end(), res.centroids.row(c).begin());
    }
    res.assignment.assign(points.rows, std::numeric_limits<std::size_t>::max());
    std::vector<double> dist2(points.rows, 0.0);
    double objective = 0.0;
    assign_points(points, res.centroids, res.assignment, dist2, objective);
    res.objective_history.push_back(objective);

    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::fill(res.centroids.data.begin(), res.centroids.data.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < points.rows; ++i) {
            const std::size_t c = res.assignment[i];
            ++counts[c];
            auto dst = res.centroids.row(c);
            const auto p = points.row(i);
            for (std::size_t d = 0; d < points.cols; ++d) {
                dst[d] += p[d];
            }
        }
        std::vector<char> reseeded(points.rows, 0);
        for (std::size_t c = 0; c < k; ++c) {
            auto dst = res.centroids.row(c);
            if (counts[c] > 0) {
                for (double& v : dst) {
                    v /= static_cast<double>(counts[c]);
                }
                continue;
            }
            // Empty cluster: move it onto the point farthest from its current centroid.
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.rows; ++i) {
                if (!reseeded[i] && dist2[i] > far_d) {
                    far_d = dist2[i];
                    far = i;
                }
            }
            reseeded[far] = 1;
            dist2[far] = 0.0;
            const auto src = points.row(far);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        const bool changed = assign_points(points, res.centroids, res.assignment, dist2, objective);
        res.objective_history.push_back(objective);
        res.iterations = it + 1;
        if (!changed) {
            res.converged = true;
            break;
        }
    }
    return res;
}

std::vector<std::size_t> closest_to_centroids(const RowMatrix& points, const RowMatrix& centroids) {
    if (centroids.rows > points.rows) {
        throw UsageError("more centroids than points");
    }
    std::vector<char> taken(points.rows, 0);
    std::vector<std::size_t> picks;
    picks.reserve(centroids.rows);
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        const auto centre = centroids.row(c);
        std::size_t best = points.rows;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.rows; ++i) {
            if (taken[i]) {
                continue;
            }
            const double d = squared_distance(points.row(i), centre);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        taken[best] = 1;
        picks.push_back(best);
    }
    return picks;
}

}  // namespace alvinlab::numkit
