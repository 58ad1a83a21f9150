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

#include "tilesim/graph.hpp"
#include "tilesim/paging.hpp"

namespace tilesim {

// Fixed virtual bases: one 4 KiB uncacheable page per core, then the
// workload arrays from kArrayVBase upward, each 2 MiB aligned.
inline constexpr Addr kUcVBase = 0x0800'0000;
inline constexpr Addr kArrayVBase = 0x1000'0000;

struct UcPage {
    Addr vaddr = 0;
    Addr paddr = 0;
};

UcPage map_uc_page(AddressSpace& as, CoreId core);

// The four traversal arrays plus the parent output. Element sizes: queue,
// offsets, neighbors and parent are 8 bytes; visited is 1 byte. qsize is a
// single 8-byte slot the hint sequence loads; it stays zero in memory and
// exists to model the queue-occupancy check's cache behavior.
struct BfsLayout {
    Addr queue = 0;
    Addr offsets = 0;
    Addr neighbors = 0;
    Addr visited = 0;
    Addr parent = 0;
    Addr qsize = 0;
    std::uint64_t n = 0;
    std::uint64_t m = 0;  // half-edge count
};

// Maps the arrays and writes the graph image (offsets, neighbors) plus the
// initial values: queue and visited zero, parent all-ones.
BfsLayout lay_out_bfs(AddressSpace& as, const AddressSpace::Writer& poke, const CsrGraph& g,
                      PagePolicy policy);

struct QsortLayout {
    Addr base = 0;      // u32[n]
    std::uint64_t n = 0;
};

// Maps the array region; the driver pokes the unsorted content afterwards.
QsortLayout lay_out_qsort(AddressSpace& as, std::uint64_t n, PagePolicy policy);

}  // namespace tilesim
