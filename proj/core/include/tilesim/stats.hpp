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

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace tilesim {

// Power-of-two bucketed histogram. Bucket k counts values whose bit width is
// k, i.e. v in [2^(k-1), 2^k) with bucket 0 holding v == 0.
class Histogram {
public:
    void add(std::uint64_t v, std::uint64_t weight = 1);
    void reset();

    std::uint64_t count() const { return count_; }
    std::uint64_t sum() const { return sum_; }
    double mean() const { return count_ ? static_cast<double>(sum_) / static_cast<double>(count_) : 0.0; }
    std::uint64_t min() const { return count_ ? min_ : 0; }
    std::uint64_t max() const { return max_; }
    std::uint64_t bucket(unsigned k) const { return buckets_[k]; }

    nlohmann::json to_json() const;

private:
    std::uint64_t buckets_[65] = {};
    std::uint64_t count_ = 0;
    std::uint64_t sum_ = 0;
    std::uint64_t min_ = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t max_ = 0;
};

// Named counters and histograms for one run. Components register by name once
// and keep the returned pointer; std::map node stability makes that safe.
// reset() zeroes values but keeps registrations, which is how the warmup pass
// is separated from the measured pass.
class StatRegistry {
public:
    std::uint64_t* counter(const std::string& name);
    Histogram* histogram(const std::string& name);

    void reset();

    // Sorted by name via map iteration order, so serialization is stable.
    nlohmann::json to_json() const;

private:
    std::map<std::string, std::uint64_t> counters_;
    std::map<std::string, Histogram> histograms_;
};

}  // namespace tilesim
