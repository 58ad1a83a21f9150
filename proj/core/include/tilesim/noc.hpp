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
#include <map>
#include <utility>
#include <vector>

#include "tilesim/kernel.hpp"
#include "tilesim/mesh.hpp"
#include "tilesim/msg.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

struct NocParams {
    std::uint32_t router_latency_cycles = 1;  // per router traversed (hops + 1)
    std::uint32_t link_latency_cycles = 1;    // per link traversed (hops)
};

// XY-routed mesh interconnect. Unloaded delivery takes
//   router_latency * (hops + 1) + link_latency * hops
// cycles of the reference clock. Contention is modeled as serialization of
// 64-byte payloads on each directed link: one data message may start per
// cycle; control messages (8 bytes) do not occupy link slots. Buffers are
// unbounded, and delivery order per (src agent, dst agent) pair matches send
// order.
class Noc {
public:
    using Handler = std::function<void(const Msg&)>;

    Noc(Kernel& kernel, const MeshDescription& mesh, const ClockDomain& clk, NocParams params,
        StatRegistry& stats);

    // Registers an agent endpoint at a tile. Agent ids are dense and assigned
    // by the system builder.
    void attach(AgentId agent, Coord tile, Handler handler);

    Coord tile_of(AgentId agent) const { return endpoints_[agent].tile; }

    // Schedules delivery to msg.dst and returns the delivery time.
    SimTime send(const Msg& msg);

private:
    struct Endpoint {
        Coord tile;
        Handler handler;
        bool attached = false;
    };

    std::uint64_t link_id(Coord from, Coord to) const;

    Kernel& kernel_;
    MeshDescription mesh_;
    ClockDomain clk_;
    NocParams params_;

    std::vector<Endpoint> endpoints_;
    // Next cycle each directed link is free to accept a data payload.
    std::vector<SimTime> link_free_;
    // Last delivery time per (src, dst) agent pair, to keep per-pair FIFO
    // even when serialization delays an older data message.
    std::map<std::pair<AgentId, AgentId>, SimTime> last_delivery_;

    std::uint64_t* msgs_sent_;
    std::uint64_t* bytes_sent_;
    std::uint64_t* data_msgs_;
    std::uint64_t* hops_total_;
    std::uint64_t* link_stall_ticks_;
};

}  // namespace tilesim
