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
#include <iosfwd>
#include <string>
#include <vector>

namespace tilesim {

// Undirected graph in compressed sparse row form. neighbors holds both
// directions of every edge; offsets has n+1 entries with offsets[n] equal to
// neighbors.size().
struct CsrGraph {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint64_t> neighbors;

    std::uint64_t half_edges() const { return neighbors.size(); }
    std::uint64_t degree(std::uint64_t v) const { return offsets[v + 1] - offsets[v]; }
    double avg_degree() const { return n == 0 ? 0.0 : double(half_edges()) / double(n); }
    // Fraction of nodes with degree strictly above the threshold.
    double degree_skew(std::uint64_t threshold) const;
    void validate() const;  // throws std::invalid_argument on malformed CSR
};

struct GraphSpec {
    enum class Kind : std::uint8_t { kronecker, file };
    Kind kind = Kind::kronecker;
    std::uint32_t scale = 12;   // log2 node count
    double degree = 52.0;       // target average degree
    std::uint64_t seed = 1;
    std::string path;           // file kind: edge list (.txt) or CSR1 binary
};

// R-MAT style generator (a=0.57, b=0.19, c=0.19): draws edges until the
// deduplicated, symmetrized, self-loop-free edge set reaches the target
// average degree. Deterministic per seed.
CsrGraph gen_kronecker(std::uint32_t scale, double degree, std::uint64_t seed);

// Whitespace-separated "u v" pairs, '#' comments. Self-loops dropped,
// duplicate edges merged, both directions added.
CsrGraph load_edge_list(std::istream& in);
void write_edge_list(const CsrGraph& g, std::ostream& out);  // one direction per edge

// Little-endian binary cache: magic "CSR1", n, m, offsets, neighbors.
CsrGraph read_csr1(std::istream& in);
void write_csr1(const CsrGraph& g, std::ostream& out);

// Dispatch on spec kind; file paths ending in ".csr" read as CSR1.
CsrGraph build_graph(const GraphSpec& spec);

}  // namespace tilesim
