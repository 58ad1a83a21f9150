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
#include <vector>

#include "tilesim/core_model.hpp"
#include "tilesim/graph.hpp"
#include "tilesim/layout.hpp"

namespace tilesim {

inline constexpr std::uint64_t kNoParent = ~std::uint64_t{0};

// Host-side breadth-first search; the oracle the simulated runs are checked
// against. parent[src] == src, unreachable nodes keep kNoParent.
std::vector<std::uint64_t> bfs_reference(const CsrGraph& g, std::uint64_t src);

struct BfsStreamConfig {
    std::uint64_t source = 0;
    bool hints = false;
    std::uint32_t hint_distance = 4;  // K, queue slots of look-ahead
    Addr doorbell = 0;                // uc page vaddr for hint commands
    std::uint64_t base_seq = 0;       // first absolute op sequence number
};

// Emits the top-down traversal as a micro-op stream: per queue entry a queue
// load, two range loads, then per edge a neighbor load, a visited load, a
// branch, and for fresh nodes the three marking stores. With hints on, nodes
// with at least hint_distance successors queued behind them additionally emit
// a nine-op hint block ending in an uncacheable command store.
class BfsSource : public OpSource {
  public:
    BfsSource(const CsrGraph& g, const BfsLayout& l, const BfsStreamConfig& c,
              StatRegistry& stats);

    std::optional<MicroOp> next() override;
    bool finished() const override;

    std::uint64_t emitted() const { return emitted_; }

  private:
    enum class St : std::uint8_t { pop, off_lo, off_hi, hint, edge, vis, branch, st_vis, st_par, st_q };

    MicroOp out(MicroOp op);
    std::uint64_t seq_now() const { return c_.base_seq + emitted_; }

    const CsrGraph& g_;
    BfsLayout l_;
    BfsStreamConfig c_;

    std::vector<std::uint8_t> visited_;
    std::vector<std::uint64_t> queue_;
    std::uint64_t head_ = 0, tail_ = 1;

    St st_ = St::pop;
    std::uint64_t u_ = 0, lo_ = 0, hi_ = 0, k_ = 0, w_ = 0;
    std::uint32_t hint_left_ = 0;
    std::uint64_t emitted_ = 0;
    std::uint64_t q_seq_ = kNoDep, off_lo_seq_ = kNoDep, off_hi_seq_ = kNoDep;
    std::uint64_t nb_seq_ = kNoDep, vis_seq_ = kNoDep, br_seq_ = kNoDep;
    std::uint64_t h_load_seq_ = kNoDep, h_br_seq_ = kNoDep;
    std::uint64_t h_agu_a_ = kNoDep, h_agu_b_ = kNoDep;

    std::uint64_t* visited_c_;
    std::uint64_t* edges_c_;
    std::uint64_t* hints_c_;
};

// Re-initializes the traversal state between passes with plain line-wide
// stores, the way a host program would clear its arrays: visited to zero,
// parent to all-ones, then the seed entries for the next source node.
class ArrayInitSource : public OpSource {
  public:
    ArrayInitSource(const BfsLayout& l, std::uint64_t next_source);

    std::optional<MicroOp> next() override;
    bool finished() const override;

  private:
    struct Fill {
        Addr base = 0;
        std::uint64_t bytes = 0;
        std::uint8_t value = 0;
    };

    std::vector<Fill> fills_;
    std::vector<MicroOp> seeds_;
    std::size_t fill_ = 0;
    std::uint64_t off_ = 0;
    std::size_t seed_ = 0;
};

}  // namespace tilesim
