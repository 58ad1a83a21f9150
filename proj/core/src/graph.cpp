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

#include "tilesim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "tilesim/rng.hpp"

namespace tilesim {

double CsrGraph::degree_skew(std::uint64_t threshold) const {
    if (n == 0) return 0.0;
    std::uint64_t over = 0;
    for (std::uint64_t v = 0; v < n; ++v)
        if (degree(v) > threshold) ++over;
    return double(over) / double(n);
}

void CsrGraph::validate() const {
    if (offsets.size() != n + 1) throw std::invalid_argument("offsets must have n+1 entries");
    if (offsets.front() != 0) throw std::invalid_argument("offsets must start at 0");
    for (std::uint64_t v = 0; v < n; ++v)
        if (offsets[v] > offsets[v + 1])
            throw std::invalid_argument("offsets must be non-decreasing");
    if (offsets.back() != neighbors.size())
        throw std::invalid_argument("offsets[n] must equal neighbor count");
    for (std::uint64_t w : neighbors)
        if (w >= n) throw std::invalid_argument("neighbor id out of range");
}

namespace {

CsrGraph pack_csr(std::uint64_t n, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges) {
    CsrGraph g;
    g.n = n;
    g.offsets.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
        ++g.offsets[u + 1];
        ++g.offsets[v + 1];
    }
    for (std::uint64_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.neighbors.resize(g.offsets[n]);
    std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        g.neighbors[cursor[u]++] = v;
        g.neighbors[cursor[v]++] = u;
    }
    for (std::uint64_t v = 0; v < n; ++v)
        std::sort(g.neighbors.begin() + static_cast<std::ptrdiff_t>(g.offsets[v]),
                  g.neighbors.begin() + static_cast<std::ptrdiff_t>(g.offsets[v + 1]));
    return g;
}

}  // namespace

CsrGraph gen_kronecker(std::uint32_t scale, double degree, std::uint64_t seed) {
    if (scale > 20) throw std::invalid_argument("kronecker scale capped at 20");
    const std::uint64_t n = 1ull << scale;
    const std::uint64_t target = static_cast<std::uint64_t>(double(n) * degree / 2.0 + 0.5);
    const double a = 0.57, b = 0.19, c = 0.19;
    Rng rng(seed);
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
    seen.reserve(target * 2);
    edges.reserve(target);
    // The skewed quadrant distribution revisits hub pairs often, so keep
    // drawing until enough distinct edges exist.
    while (edges.size() < target) {
        std::uint64_t u = 0, v = 0;
        for (std::uint32_t bit = 0; bit < scale; ++bit) {
            const double r = rng.next_double();
            std::uint32_t qu = 0, qv = 0;
            if (r < a) {
            } else if (r < a + b) {
                qv = 1;
            } else if (r < a + b + c) {
                qu = 1;
            } else {
                qu = 1;
                qv = 1;
            }
            u = (u << 1) | qu;
            v = (v << 1) | qv;
        }
        if (u == v) continue;
        const std::uint64_t key = std::min(u, v) * n + std::max(u, v);
        if (seen.insert(key).second) edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    return pack_csr(n, edges);
}

CsrGraph load_edge_list(std::istream& in) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
    std::unordered_set<std::uint64_t> seen;
    std::uint64_t max_id = 0;
    bool any = false;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream is(line);
        std::uint64_t u, v;
        if (!(is >> u >> v))
            throw std::invalid_argument("edge list parse error at line " + std::to_string(line_no));
        std::string trailing;
        if (is >> trailing)
            throw std::invalid_argument("edge list parse error at line " + std::to_string(line_no));
        any = true;
        max_id = std::max({max_id, u, v});
        if (u == v) continue;
        const std::uint64_t lo = std::min(u, v), hi = std::max(u, v);
        // Node-count-independent pair key; ids fit 32 bits at desk scale.
        if (lo > 0xFFFFFFFFull || hi > 0xFFFFFFFFull)
            throw std::invalid_argument("node id too large at line " + std::to_string(line_no));
        if (seen.insert((lo << 32) | hi).second) edges.emplace_back(lo, hi);
    }
    return pack_csr(any ? max_id + 1 : 0, edges);
}

void write_edge_list(const CsrGraph& g, std::ostream& out) {
    for (std::uint64_t u = 0; u < g.n; ++u)
        for (std::uint64_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i)
            if (u <= g.neighbors[i]) out << u << ' ' << g.neighbors[i] << '\n';
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    std::uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::invalid_argument("truncated CSR1 stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void write_csr1(const CsrGraph& g, std::ostream& out) {
    out.write("CSR1", 4);
    put_u64(out, g.n);
    put_u64(out, g.neighbors.size());
    for (std::uint64_t v : g.offsets) put_u64(out, v);
    for (std::uint64_t v : g.neighbors) put_u64(out, v);
}

CsrGraph read_csr1(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "CSR1")
        throw std::invalid_argument("not a CSR1 stream");
    CsrGraph g;
    g.n = get_u64(in);
    const std::uint64_t m = get_u64(in);
    g.offsets.resize(g.n + 1);
    for (auto& v : g.offsets) v = get_u64(in);
    g.neighbors.resize(m);
    for (auto& v : g.neighbors) v = get_u64(in);
    g.validate();
    return g;
}

CsrGraph build_graph(const GraphSpec& spec) {
    if (spec.kind == GraphSpec::Kind::kronecker)
        return gen_kronecker(spec.scale, spec.degree, spec.seed);
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open graph file: " + spec.path);
    if (spec.path.size() >= 4 && spec.path.substr(spec.path.size() - 4) == ".csr")
        return read_csr1(in);
    return load_edge_list(in);
}

}  // namespace tilesim
