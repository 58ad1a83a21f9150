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
#include <random>

namespace tilesim {

// mt19937_64 has a portable, standard-mandated output sequence. Distributions
// do not, so all bounded draws go through the helpers below instead of
// std::uniform_int_distribution. That keeps runs byte-identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased draw in [0, bound) via rejection sampling.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~0ull - (~0ull % bound + 1) % bound;
        std::uint64_t v = gen_();
        while (v > limit) v = gen_();
        return v % bound;
    }

    std::uint64_t next_range(std::uint64_t lo, std::uint64_t hi_inclusive) {
        return lo + next_below(hi_inclusive - lo + 1);
    }

    // 53-bit mantissa uniform in [0, 1).
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool next_bool(double p_true) { return next_double() < p_true; }

    // Deterministic substream derivation so components can draw independently
    // without sharing one generator whose consumption order would matter.
    Rng fork(std::uint64_t stream_tag) {
        return Rng(gen_() ^ (stream_tag * 0x9E3779B97F4A7C15ull));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace tilesim
