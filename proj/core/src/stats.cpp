/*
 * Copyright 2026 The Tilesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tilesim/stats.hpp"

#include <bit>

namespace tilesim {

void Histogram::add(std::uint64_t v, std::uint64_t weight) {
    buckets_[std::bit_width(v)] += weight;
    count_ += weight;
    sum_ += v * weight;
    if (v < min_) min_ = v;
    if (v > max_) max_ = v;
}

void Histogram::reset() { *this = Histogram{}; }

nlohmann::json Histogram::to_json() const {
    nlohmann::json buckets = nlohmann::json::object();
    for (unsigned k = 0; k <= 64; ++k) {
        if (buckets_[k] == 0) continue;
        std::uint64_t lo = k == 0 ? 0 : (1ull << (k - 1));
        buckets[std::to_string(lo)] = buckets_[k];
    }
    return nlohmann::json{{"count", count()},
                          {"sum", sum()},
                          {"mean", mean()},
                          {"min", min()},
                          {"max", max()},
                          {"buckets", std::move(buckets)}};
}

std::uint64_t* StatRegistry::counter(const std::string& name) { return &counters_[name]; }

Histogram* StatRegistry::histogram(const std::string& name) { return &histograms_[name]; }

void StatRegistry::reset() {
    for (auto& [name, v] : counters_) v = 0;
    for (auto& [name, h] : histograms_) h.reset();
}

nlohmann::json StatRegistry::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, v] : counters_) out[name] = v;
    for (const auto& [name, h] : histograms_) out[name] = h.to_json();
    return out;
}

}  // namespace tilesim
