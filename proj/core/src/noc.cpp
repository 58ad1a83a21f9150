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

#include "tilesim/noc.hpp"

#include <cassert>
#include <stdexcept>

namespace tilesim {

const char* to_string(CohOp op) {
    switch (op) {
        case CohOp::GetS: return "GetS";
        case CohOp::GetM: return "GetM";
        case CohOp::PutS: return "PutS";
        case CohOp::PutE: return "PutE";
        case CohOp::PutM: return "PutM";
        case CohOp::Unblock: return "Unblock";
        case CohOp::FwdGetS: return "FwdGetS";
        case CohOp::FwdGetM: return "FwdGetM";
        case CohOp::Inv: return "Inv";
        case CohOp::DataS: return "DataS";
        case CohOp::DataE: return "DataE";
        case CohOp::DataM: return "DataM";
        case CohOp::GrantM: return "GrantM";
        case CohOp::InvAck: return "InvAck";
        case CohOp::WbData: return "WbData";
        case CohOp::PutAck: return "PutAck";
        case CohOp::MemRead: return "MemRead";
        case CohOp::MemWriteback: return "MemWriteback";
        case CohOp::MemData: return "MemData";
    }
    return "?";
}

Noc::Noc(Kernel& kernel, const MeshDescription& mesh, const ClockDomain& clk, NocParams params,
         StatRegistry& stats)
    : kernel_(kernel), mesh_(mesh), clk_(clk), params_(params) {
    link_free_.resize(static_cast<std::size_t>(mesh_.width()) * mesh_.height() * 4, 0);
    msgs_sent_ = stats.counter("noc.messages");
    bytes_sent_ = stats.counter("noc.bytes");
    data_msgs_ = stats.counter("noc.data_messages");
    hops_total_ = stats.counter("noc.hops");
    link_stall_ticks_ = stats.counter("noc.link_stall_ticks");
}

void Noc::attach(AgentId agent, Coord tile, Handler handler) {
    if (endpoints_.size() <= agent) endpoints_.resize(agent + 1);
    assert(!endpoints_[agent].attached && "agent already attached");
    endpoints_[agent] = Endpoint{tile, std::move(handler), true};
}

std::uint64_t Noc::link_id(Coord from, Coord to) const {
    // Four outgoing directions per tile: 0=east 1=west 2=south 3=north.
    std::uint32_t dir;
    if (to.x == from.x + 1) dir = 0;
    else if (to.x + 1 == from.x) dir = 1;
    else if (to.y == from.y + 1) dir = 2;
    else if (to.y + 1 == from.y) dir = 3;
    else throw std::logic_error("link between non-adjacent tiles");
    return (static_cast<std::uint64_t>(from.y) * mesh_.width() + from.x) * 4 + dir;
}

SimTime Noc::send(const Msg& msg) {
    assert(msg.src < endpoints_.size() && endpoints_[msg.src].attached);
    assert(msg.dst < endpoints_.size() && endpoints_[msg.dst].attached);

    const Coord src = endpoints_[msg.src].tile;
    const Coord dst = endpoints_[msg.dst].tile;
    const auto route = MeshDescription::xy_route(src, dst);
    const SimTime router_ticks = clk_.cycles(params_.router_latency_cycles);
    const SimTime link_ticks = clk_.cycles(params_.link_latency_cycles);
    const bool is_data = msg.payload_bytes() == kLineBytes;

    SimTime t = kernel_.now() + router_ticks;
    Coord prev = src;
    for (Coord next : route) {
        if (is_data) {
            const auto lid = link_id(prev, next);
            SimTime start = std::max(t, link_free_[lid]);
            *link_stall_ticks_ += start - t;
            link_free_[lid] = start + clk_.period();
            t = start;
        }
        t += link_ticks + router_ticks;
        prev = next;
    }

    // Keep per-pair delivery order consistent with send order even when link
    // serialization delayed an earlier data message.
    SimTime& last = last_delivery_[{msg.src, msg.dst}];
    if (t < last) t = last;
    last = t;

    *msgs_sent_ += 1;
    *bytes_sent_ += msg.payload_bytes();
    *hops_total_ += route.size();
    if (is_data) *data_msgs_ += 1;

    Handler& handler = endpoints_[msg.dst].handler;
    kernel_.schedule_at(t, [&handler, msg] { handler(msg); });
    return t;
}

}  // namespace tilesim
