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
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tilesim/cache_array.hpp"
#include "tilesim/cache_if.hpp"
#include "tilesim/kernel.hpp"
#include "tilesim/msg.hpp"
#include "tilesim/stats.hpp"
#include "tilesim/stride_prefetcher.hpp"

namespace tilesim {

class Noc;

// One coherence participant: either a core's private stack (L1I + L1D over a
// unified L2) or the engine-side cache. The L1 arrays are presence/latency
// filters mirroring L2 (inclusive, never dirty); line data and dirtiness live
// in the L2 array. Misses allocate MSHRs and run directory transactions
// against the line's home slice; evicted lines sit in a writeback buffer
// until the home acknowledges, and snoops are served from there when they
// race with an eviction.
class CacheAgent {
public:
    struct Layout {
        bool has_l1 = true;
        CacheGeometry l1i;
        CacheGeometry l1d;
        CacheGeometry l2;
        StridePrefetcherParams stride;
        // Prefetch targets at or beyond this physical address are dropped.
        std::uint64_t phys_limit = ~0ull;
    };

    CacheAgent(Kernel& kernel, Noc& noc, StatRegistry& stats, const std::string& prefix,
               AgentId self, std::uint32_t peer_index, const Layout& layout, const ClockDomain& clk,
               std::function<AgentId(Addr)> home_of);

    void access(CacheReq req);
    void handle(const Msg& msg);

    // Observation hook for the data-value checker; invoked at every
    // completion with the request and the post-op line content.
    std::function<void(const CacheReq&, const std::array<std::uint8_t, kLineBytes>&)> on_complete;

    AgentId agent() const { return self_; }
    std::uint32_t peer_index() const { return peer_index_; }
    const CacheArray& l1i() const { return l1i_; }
    const CacheArray& l1d() const { return l1d_; }
    const CacheArray& l2() const { return l2_; }
    bool has_l1() const { return layout_.has_l1; }

    struct WbEntry {
        Addr line = 0;
        std::array<std::uint8_t, kLineBytes> data{};
        bool dirty = false;
        bool was_owner = false;
        bool downgraded = false;
        std::uint64_t txn = 0;
    };
    const std::vector<WbEntry>& wb_buffer() const { return wb_; }

    bool idle() const { return mshrs_.empty() && wb_.empty() && parked_.empty() && inflight_d_ == 0 && inflight_i_ == 0; }

    // Evicts every valid L2 line (used by drain checks in tests).
    void flush_all();

private:
    struct Mshr {
        Addr line = 0;
        bool is_write = false;
        bool data_seen = false;
        bool grant_seen = false;
        bool lost_copy = false;
        bool fill_l1d = false;
        bool fill_l1i = false;
        int acks_needed = 0;
        LineState grant_state = LineState::I;
        bool grant_dirty = false;
        std::array<std::uint8_t, kLineBytes> data{};
        std::uint64_t txn = 0;
        CacheReq::Kind alloc_kind = CacheReq::Kind::read;
        std::vector<CacheReq> waiters;
    };

    void try_start(CacheReq&& req);
    void park(CacheReq&& req);
    void retry_parked();
    void l2_stage(CacheReq&& req);
    void start_prefetch(CacheReq&& req);
    void complete_l1_hit(CacheReq&& req, bool via_l1i);
    void complete_l2_hit(CacheReq&& req);
    void allocate_mshr(CacheReq&& req, bool is_write);
    void maybe_complete(Mshr& m);
    void install_and_finish(Mshr m);
    void make_room(Addr incoming_line, std::function<void()> then);
    void evict(CacheLine& line);
    void fill_l1(CacheArray& l1, Addr line_addr);
    void back_invalidate_l1(Addr line_addr);
    void observe_prefetcher(StridePrefetcher& pf, bool to_l1, std::uint64_t stream, Addr line_addr);
    void finish_one(const CacheReq& req, CacheLine& line);
    void snoop(const Msg& msg);
    void send(Msg m) const;
    std::uint64_t release_slot(CacheReq::Kind kind, bool via_l1i);

    Kernel& kernel_;
    Noc& noc_;
    AgentId self_;
    std::uint32_t peer_index_;
    Layout layout_;
    ClockDomain clk_;
    std::function<AgentId(Addr)> home_of_;

    CacheArray l1i_;
    CacheArray l1d_;
    CacheArray l2_;
    StridePrefetcher pf_l1d_;
    StridePrefetcher pf_l2_;

    std::map<Addr, Mshr> mshrs_;
    std::vector<WbEntry> wb_;
    std::deque<CacheReq> parked_;
    std::vector<Mshr> stalled_installs_;
    std::uint32_t inflight_d_ = 0;  // requests past L1D, capped by l1d.mshrs
    std::uint32_t inflight_i_ = 0;
    std::uint64_t next_txn_ = 0;
    bool draining_parked_ = false;

    std::uint64_t* l1i_hits_;
    std::uint64_t* l1i_misses_;
    std::uint64_t* l1d_hits_;
    std::uint64_t* l1d_misses_;
    std::uint64_t* l2_hits_;
    std::uint64_t* l2_misses_;
    std::uint64_t* l2_evictions_;
    std::uint64_t* pf_issued_;
    std::uint64_t* pf_useful_;
    std::uint64_t* pf_dropped_;
    std::uint64_t* hit_replays_ = nullptr;
    std::uint64_t* pf_merged_;
    std::uint64_t* parks_;
    std::uint64_t* wb_highwater_;
};

}  // namespace tilesim
