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

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "tilesim/types.hpp"

namespace tilesim {

struct CacheGeometry {
    std::uint64_t capacity_bytes = 0;
    std::uint32_t ways = 1;
    std::uint32_t hit_latency = 4;  // cycles
    std::uint32_t tag_latency = 4;  // cycles, charged on the way past a miss
    std::uint32_t mshrs = 16;

    std::uint64_t sets() const { return capacity_bytes / (static_cast<std::uint64_t>(ways) * kLineBytes); }
};

enum class LineState : std::uint8_t { I, S, E, M };

struct CacheLine {
    Addr addr = 0;  // full line address stands in for the tag
    LineState state = LineState::I;
    bool dirty = false;       // used by the L3 victim array (S + dirty)
    bool prefetched = false;  // set on prefetch fill, cleared on first demand hit
    std::uint64_t lru = 0;
    std::array<std::uint8_t, kLineBytes> data{};

    bool valid() const { return state != LineState::I; }
};

// Set-associative array with true-LRU replacement. Pure storage/lookup; all
// protocol behavior lives in the controllers.
class CacheArray {
public:
    explicit CacheArray(const CacheGeometry& geo);

    const CacheGeometry& geometry() const { return geo_; }

    CacheLine* find(Addr line_addr);
    const CacheLine* find(Addr line_addr) const;
    void touch(CacheLine& line) { line.lru = ++lru_clock_; }

    // Replacement candidate in the line's set: an invalid way if one exists,
    // else the LRU way. Never returns null.
    CacheLine* victim_for(Addr line_addr);

    // Same, restricted to ways the predicate allows; null when every way is
    // disallowed.
    CacheLine* victim_for_if(Addr line_addr, const std::function<bool(const CacheLine&)>& allowed);

    void invalidate(CacheLine& line) { line.state = LineState::I; line.dirty = false; line.prefetched = false; }

    void for_each_valid(const std::function<void(const CacheLine&)>& fn) const;

private:
    std::uint64_t set_index(Addr line_addr) const { return (line_addr >> kLineShift) & (sets_ - 1); }

    CacheGeometry geo_;
    std::uint64_t sets_;
    std::uint64_t lru_clock_ = 0;
    std::vector<CacheLine> lines_;
};

}  // namespace tilesim
