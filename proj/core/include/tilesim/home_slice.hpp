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
#include <optional>
#include <vector>

#include "tilesim/cache_array.hpp"
#include "tilesim/kernel.hpp"
#include "tilesim/msg.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

class Noc;

// Home node for one L3 slice: per-line directory over the private caches
// plus the victim L3 array. Transactions serialize per line; a requester ends
// a transaction with Unblock, and the directory applies the new stable state
// only then, so the sharer/owner view never understates actual holders.
//
// Victim semantics: the L3 array fills only from evictions that remove the
// last private copy, and any L3 hit hands the line to the requester and
// invalidates it here.
class HomeSlice {
public:
    HomeSlice(Kernel& kernel, Noc& noc, StatRegistry& stats, AgentId self,
              const CacheGeometry& l3_geo, const ClockDomain& clk, std::vector<AgentId> peers,
              std::function<AgentId(Addr)> mem_agent_of);

    void handle(const Msg& msg);

    const CacheArray& l3() const { return l3_; }
    AgentId agent() const { return self_; }
    bool idle() const;

    struct DirView {
        std::uint32_t sharers = 0;  // peer-index bitmask
        std::optional<std::uint32_t> owner;
        bool busy = false;
    };
    void snapshot(std::map<Addr, DirView>& out) const;

private:
    struct Pending {
        AgentId requester = kInvalidAgent;
        std::uint64_t txn = 0;
        bool is_getm = false;
        bool want_mem = false;
        std::uint32_t mem_acks = 0;  // ack count to attach to the DataM after MemData
        // Stable state to apply at Unblock.
        std::optional<std::uint8_t> final_owner;
        std::uint32_t final_sharers = 0;
    };

    struct DirEntry {
        std::uint32_t sharers = 0;
        std::optional<std::uint8_t> owner;
        bool busy = false;
        Pending pending;
        std::deque<Msg> waiting;
    };

    void start(const Msg& msg);
    void decide_get(const Msg& msg);
    void apply_put(const Msg& msg);
    void finish(DirEntry& e, Addr addr);
    void fill_l3(Addr addr, const std::array<std::uint8_t, kLineBytes>& data, bool dirty);
    void send(Msg m) const;
    std::uint8_t peer_index(AgentId agent) const;

    Kernel& kernel_;
    Noc& noc_;
    AgentId self_;
    CacheArray l3_;
    SimTime lookup_ticks_;
    std::vector<AgentId> peers_;
    std::function<AgentId(Addr)> mem_agent_of_;

    std::map<Addr, DirEntry> dir_;

    std::uint64_t* l3_hits_;
    std::uint64_t* l3_misses_;
    std::uint64_t* l3_fills_;
    std::uint64_t* l3_evictions_;
    std::uint64_t* l3_writebacks_;
    std::uint64_t* stale_puts_;
    std::uint64_t* txns_;
};

}  // namespace tilesim
