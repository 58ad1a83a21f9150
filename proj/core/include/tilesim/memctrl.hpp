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

#include "tilesim/backing_store.hpp"
#include "tilesim/kernel.hpp"
#include "tilesim/msg.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

class Noc;

struct MemParams {
    std::uint32_t channels = 4;
    double channel_bandwidth_gib = 4.8;  // per channel
    double fixed_latency_ns = 50.0;
    std::uint64_t capacity_bytes = 64ull << 20;
};

// Bandwidth/latency DRAM model. Each channel is a FIFO pipe: a line request
// occupies the channel for the 64-byte service time and completes a fixed
// latency after its service slot starts. Addresses interleave across channels
// at 4 KiB granularity; channels spread contiguously over the memory tiles.
class MemController {
public:
    MemController(Kernel& kernel, Noc& noc, BackingStore& store, MemParams params,
                  std::vector<AgentId> tile_agents, StatRegistry& stats);

    // NoC endpoint handler for every owning memory tile.
    void handle(const Msg& msg);

    std::uint32_t channel_of(Addr a) const { return static_cast<std::uint32_t>((a >> kPageShift) % params_.channels); }
    AgentId agent_for(Addr a) const { return tile_agents_[channel_of(a) / channels_per_tile_]; }

    SimTime service_ticks() const { return service_ticks_; }
    SimTime latency_ticks() const { return latency_ticks_; }

private:
    Kernel& kernel_;
    Noc& noc_;
    BackingStore& store_;
    MemParams params_;
    std::vector<AgentId> tile_agents_;
    std::uint32_t channels_per_tile_;

    SimTime service_ticks_;
    SimTime latency_ticks_;
    std::vector<SimTime> busy_until_;

    std::uint64_t* reads_;
    std::uint64_t* writebacks_;
    std::uint64_t* busy_ticks_;
};

}  // namespace tilesim
