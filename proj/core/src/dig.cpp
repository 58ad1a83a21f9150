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

#include "tilesim/dig.hpp"

#include <algorithm>
#include <stdexcept>

namespace tilesim {

void DigDescriptor::validate() const {
    if (nodes.empty()) throw std::invalid_argument("dig: no nodes");
    if (nodes.size() > 255) throw std::invalid_argument("dig: too many nodes");
    if (edges.size() != nodes.size() - 1)
        throw std::invalid_argument("dig: edge count does not form a chain");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const DigEdge& e = edges[k];
        if (e.src != k || e.dst != k + 1)
            throw std::invalid_argument("dig: edge endpoints out of chain order");
        const DigNode& src = nodes[e.src];
        if (e.rel == DigEdge::Relation::range_pair &&
            src.kind != DigNode::Kind::range_array)
            throw std::invalid_argument("dig: range_pair edge from non-range node");
        if (e.rel == DigEdge::Relation::index_by_value && src.elem_size < 1)
            throw std::invalid_argument("dig: index_by_value needs readable source");
    }
    for (const DigNode& n : nodes) {
        switch (n.elem_size) {
            case 1: case 2: case 4: case 8: break;
            default: throw std::invalid_argument("dig: element size not 1/2/4/8");
        }
    }
    if (nodes.front().kind != DigNode::Kind::queue)
        throw std::invalid_argument("dig: chain must start at the queue");
}

namespace {

void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& v, std::size_t& at) {
    if (at + 8 > v.size()) throw std::invalid_argument("dig blob truncated");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t{v[at++]} << (8 * i);
    return x;
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& v, std::size_t& at) {
    if (at + 4 > v.size()) throw std::invalid_argument("dig blob truncated");
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t{v[at++]} << (8 * i);
    return x;
}

std::uint8_t get_u8(const std::vector<std::uint8_t>& v, std::size_t& at) {
    if (at >= v.size()) throw std::invalid_argument("dig blob truncated");
    return v[at++];
}

}  // namespace

std::vector<std::uint8_t> DigDescriptor::serialize() const {
    validate();
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(nodes.size()));
    for (const DigNode& n : nodes) {
        put_u64(out, n.base);
        put_u32(out, n.elem_size);
        out.push_back(static_cast<std::uint8_t>(n.kind));
    }
    out.push_back(static_cast<std::uint8_t>(edges.size()));
    for (const DigEdge& e : edges) {
        out.push_back(e.src);
        out.push_back(e.dst);
        out.push_back(static_cast<std::uint8_t>(e.rel));
    }
    return out;
}

DigDescriptor DigDescriptor::deserialize(const std::vector<std::uint8_t>& blob) {
    DigDescriptor d;
    std::size_t at = 0;
    const std::uint8_t nn = get_u8(blob, at);
    for (std::uint8_t i = 0; i < nn; ++i) {
        DigNode n;
        n.base = get_u64(blob, at);
        n.elem_size = get_u32(blob, at);
        n.kind = static_cast<DigNode::Kind>(get_u8(blob, at));
        d.nodes.push_back(n);
    }
    const std::uint8_t ne = get_u8(blob, at);
    for (std::uint8_t i = 0; i < ne; ++i) {
        DigEdge e;
        e.src = get_u8(blob, at);
        e.dst = get_u8(blob, at);
        e.rel = static_cast<DigEdge::Relation>(get_u8(blob, at));
        d.edges.push_back(e);
    }
    if (at != blob.size()) throw std::invalid_argument("dig blob has trailing bytes");
    d.validate();
    return d;
}

DigDescriptor DigDescriptor::for_bfs(const BfsLayout& l) {
    DigDescriptor d;
    d.nodes = {
        {l.queue, 8, DigNode::Kind::queue},
        {l.offsets, 8, DigNode::Kind::range_array},
        {l.neighbors, 8, DigNode::Kind::edge_array},
        {l.visited, 1, DigNode::Kind::value_array},
    };
    d.edges = {
        {0, 1, DigEdge::Relation::index_by_value},
        {1, 2, DigEdge::Relation::range_pair},
        {2, 3, DigEdge::Relation::index_by_value},
    };
    d.validate();
    return d;
}

std::vector<Addr> dig_reference_lines(const DigDescriptor& d, const DigReader& read,
                                      std::uint64_t queue_index) {
    d.validate();
    std::vector<Addr> lines;
    auto touch = [&lines](Addr a) {
        const Addr ln = line_of(a);
        if (std::find(lines.begin(), lines.end(), ln) == lines.end())
            lines.push_back(ln);
    };

    // Indices into the current node; starts as the single queue slot.
    std::vector<std::uint64_t> idx = {queue_index};
    for (std::size_t level = 0; level < d.nodes.size(); ++level) {
        const DigNode& node = d.nodes[level];
        const bool last = level + 1 == d.nodes.size();
        std::vector<std::uint64_t> next;
        if (!last && d.edges[level].rel == DigEdge::Relation::range_pair) {
            for (std::uint64_t i : idx) {
                const Addr lo_a = node.base + i * node.elem_size;
                const Addr hi_a = node.base + (i + 1) * node.elem_size;
                touch(lo_a);
                touch(hi_a);
                const std::uint64_t lo = read(lo_a, node.elem_size);
                const std::uint64_t hi = read(hi_a, node.elem_size);
                for (std::uint64_t k = lo; k < hi; ++k) next.push_back(k);
            }
        } else {
            for (std::uint64_t i : idx) {
                const Addr a = node.base + i * node.elem_size;
                touch(a);
                if (!last) next.push_back(read(a, node.elem_size));
            }
        }
        idx = std::move(next);
    }
    return lines;
}

}  // namespace tilesim
