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

#include "tilesim/cache_array.hpp"

#include <bit>
#include <stdexcept>

namespace tilesim {

CacheArray::CacheArray(const CacheGeometry& geo) : geo_(geo) {
    if (geo.capacity_bytes == 0 || geo.ways == 0 ||
        geo.capacity_bytes % (static_cast<std::uint64_t>(geo.ways) * kLineBytes) != 0) {
        throw std::invalid_argument("cache capacity must be a multiple of ways * line size");
    }
    sets_ = geo.sets();
    if (!std::has_single_bit(sets_)) {
        throw std::invalid_argument("cache set count must be a power of two");
    }
    lines_.resize(sets_ * geo.ways);
}

CacheLine* CacheArray::find(Addr line_addr) {
    CacheLine* base = &lines_[set_index(line_addr) * geo_.ways];
    for (std::uint32_t w = 0; w < geo_.ways; ++w) {
        if (base[w].valid() && base[w].addr == line_addr) return &base[w];
    }
    return nullptr;
}

const CacheLine* CacheArray::find(Addr line_addr) const {
    return const_cast<CacheArray*>(this)->find(line_addr);
}

CacheLine* CacheArray::victim_for(Addr line_addr) {
    CacheLine* base = &lines_[set_index(line_addr) * geo_.ways];
    CacheLine* victim = &base[0];
    for (std::uint32_t w = 0; w < geo_.ways; ++w) {
        if (!base[w].valid()) return &base[w];
        if (base[w].lru < victim->lru) victim = &base[w];
    }
    return victim;
}

CacheLine* CacheArray::victim_for_if(Addr line_addr,
                                     const std::function<bool(const CacheLine&)>& allowed) {
    CacheLine* base = &lines_[set_index(line_addr) * geo_.ways];
    CacheLine* victim = nullptr;
    for (std::uint32_t w = 0; w < geo_.ways; ++w) {
        if (!allowed(base[w])) continue;
        if (!base[w].valid()) return &base[w];
        if (!victim || base[w].lru < victim->lru) victim = &base[w];
    }
    return victim;
}

void CacheArray::for_each_valid(const std::function<void(const CacheLine&)>& fn) const {
    for (const CacheLine& l : lines_) {
        if (l.valid()) fn(l);
    }
}

}  // namespace tilesim
