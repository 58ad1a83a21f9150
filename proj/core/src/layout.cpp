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

#include "tilesim/layout.hpp"

#include <vector>

namespace tilesim {

UcPage map_uc_page(AddressSpace& as, CoreId core) {
    UcPage p;
    p.vaddr = kUcVBase + static_cast<Addr>(core) * kPageBytes;
    as.map_region(p.vaddr, kPageBytes, kPageShift);
    p.paddr = as.translate(p.vaddr)->paddr;
    return p;
}

namespace {

// Sequential placement after any existing regions at or above kArrayVBase.
Addr next_array_base(const AddressSpace& as) {
    Addr base = kArrayVBase;
    for (const auto& r : as.regions())
        if (r.vbase + r.length > base && r.vbase >= kUcVBase) base = r.vbase + r.length;
    return align_up(base, kHugePageBytes);
}

Addr map_array(AddressSpace& as, std::uint64_t bytes, PagePolicy policy) {
    const std::uint32_t shift = page_shift_for(policy, bytes);
    const Addr vbase = next_array_base(as);
    as.map_region(vbase, align_up(std::max<std::uint64_t>(bytes, 1), 1ull << shift), shift);
    return vbase;
}

}  // namespace

BfsLayout lay_out_bfs(AddressSpace& as, const AddressSpace::Writer& poke, const CsrGraph& g,
                      PagePolicy policy) {
    BfsLayout l;
    l.n = g.n;
    l.m = g.half_edges();
    l.queue = map_array(as, l.n * 8, policy);
    l.offsets = map_array(as, (l.n + 1) * 8, policy);
    l.neighbors = map_array(as, l.m * 8, policy);
    l.visited = map_array(as, l.n, policy);
    l.parent = map_array(as, l.n * 8, policy);
    l.qsize = map_array(as, 8, PagePolicy::small_only);

    poke_virtual(as, poke, l.offsets, g.offsets.data(), g.offsets.size() * 8);
    if (!g.neighbors.empty())
        poke_virtual(as, poke, l.neighbors, g.neighbors.data(), g.neighbors.size() * 8);
    // queue and visited start zero, which fresh frames already are.
    std::vector<std::uint8_t> ones(4096, 0xFF);
    for (std::uint64_t off = 0; off < l.n * 8; off += ones.size()) {
        const std::size_t chunk = std::min<std::uint64_t>(ones.size(), l.n * 8 - off);
        poke_virtual(as, poke, l.parent + off, ones.data(), chunk);
    }
    return l;
}

QsortLayout lay_out_qsort(AddressSpace& as, std::uint64_t n, PagePolicy policy) {
    QsortLayout l;
    l.n = n;
    l.base = map_array(as, std::max<std::uint64_t>(n * 4, 4), policy);
    return l;
}

}  // namespace tilesim
