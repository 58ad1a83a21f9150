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

#include "tilesim/memctrl.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "tilesim/noc.hpp"

namespace tilesim {

MemController::MemController(Kernel& kernel, Noc& noc, BackingStore& store, MemParams params,
                             std::vector<AgentId> tile_agents, StatRegistry& stats)
    : kernel_(kernel), noc_(noc), store_(store), params_(params), tile_agents_(std::move(tile_agents)) {
    if (tile_agents_.empty() || params_.channels % tile_agents_.size() != 0) {
        throw std::invalid_argument("channel count must be a multiple of memory tile count");
    }
    channels_per_tile_ = params_.channels / static_cast<std::uint32_t>(tile_agents_.size());
    const double bytes_per_sec = params_.channel_bandwidth_gib * 1073741824.0;
    service_ticks_ = static_cast<SimTime>(std::llround(kLineBytes * 1e12 / bytes_per_sec));
    latency_ticks_ = static_cast<SimTime>(std::llround(params_.fixed_latency_ns * 1000.0));
    busy_until_.assign(params_.channels, 0);

    reads_ = stats.counter("mem.reads");
    writebacks_ = stats.counter("mem.writebacks");
    busy_ticks_ = stats.counter("mem.busy_ticks");
}

void MemController::handle(const Msg& msg) {
    assert(line_of(msg.addr) == msg.addr);
    const std::uint32_t ch = channel_of(msg.addr);
    SimTime start = std::max(kernel_.now(), busy_until_[ch]);
    busy_until_[ch] = start + service_ticks_;
    *busy_ticks_ += service_ticks_;
    const SimTime done = start + latency_ticks_;

    switch (msg.op) {
        case CohOp::MemRead: {
            *reads_ += 1;
            // Data is sampled at completion time, after any earlier writeback
            // on this channel has already landed.
            Msg reply = msg;
            kernel_.schedule_at(done, [this, reply]() mutable {
                reply.op = CohOp::MemData;
                reply.dst = reply.src;
                reply.src = agent_for(reply.addr);
                reply.dirty = false;
                reply.data = store_.read_line(reply.addr);
                noc_.send(reply);
            });
            break;
        }
        case CohOp::MemWriteback: {
            *writebacks_ += 1;
            const Msg wb = msg;
            kernel_.schedule_at(done, [this, wb] { store_.write_line(wb.addr, wb.data); });
            break;
        }
        default:
            throw std::logic_error("memory controller received non-memory message");
    }
}

}  // namespace tilesim
