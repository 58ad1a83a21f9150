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
#include <functional>
#include <vector>

#include "tilesim/layout.hpp"
#include "tilesim/types.hpp"

namespace tilesim {

// Describes a chain of index-based indirections between arrays, enough for a
// prefetcher to compute the exact future address set from one queue index.
struct DigNode {
    enum class Kind : std::uint8_t { queue, range_array, edge_array, value_array };
    Addr base = 0;
    std::uint32_t elem_size = 8;
    Kind kind = Kind::queue;
};

struct DigEdge {
    enum class Relation : std::uint8_t {
        index_by_value,  // values read from src index dst
        range_pair,      // consecutive src values bound a dst span
    };
    std::uint8_t src = 0;
    std::uint8_t dst = 0;
    Relation rel = Relation::index_by_value;
};

struct DigDescriptor {
    std::vector<DigNode> nodes;
    std::vector<DigEdge> edges;

    // Enforces a chain: edge k connects node k to node k+1. (A chain is the
    // only DAG shape the traversal workloads need.)
    void validate() const;

    std::vector<std::uint8_t> serialize() const;
    static DigDescriptor deserialize(const std::vector<std::uint8_t>& blob);

    // The four-array instance: work queue, neighbor ranges, neighbor list,
    // visited bytes.
    static DigDescriptor for_bfs(const BfsLayout& l);
};

// Functional element read used by the reference interpreter.
using DigReader = std::function<std::uint64_t(Addr vaddr, std::uint32_t size)>;

// Walks the chain for the entry at queue_index and returns every line the
// walk touches, first-use order, no duplicates. This is the exact-address
// reference the timed prefetcher is held to.
std::vector<Addr> dig_reference_lines(const DigDescriptor& d, const DigReader& read,
                                      std::uint64_t queue_index);

}  // namespace tilesim
