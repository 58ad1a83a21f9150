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

#include <array>
#include <cstdint>

#include "tilesim/types.hpp"

namespace tilesim {

// Messages of the directory protocol, all carried by the NoC.
enum class CohOp : std::uint8_t {
    // requester -> home
    GetS,
    GetM,
    PutS,
    PutE,
    PutM,
    Unblock,
    // home -> private cache (snoops)
    FwdGetS,
    FwdGetM,
    Inv,
    // data/ack toward the requester
    DataS,
    DataE,
    DataM,    // carries invalidation ack count to wait for
    GrantM,   // ownership without data (upgrade from Shared)
    InvAck,
    // owner -> home
    WbData,   // dirty data handed over on a downgrade
    // home -> evictor
    PutAck,
    // home <-> memory controller
    MemRead,
    MemWriteback,
    MemData,
};

const char* to_string(CohOp op);

// Accounting class for NoC statistics.
enum class MsgKind : std::uint8_t { request, response, snoop, writeback, uc_forward };

constexpr bool carries_line_data(CohOp op) {
    switch (op) {
        case CohOp::PutS:
        case CohOp::PutE:
        case CohOp::PutM:
        case CohOp::DataS:
        case CohOp::DataE:
        case CohOp::DataM:
        case CohOp::WbData:
        case CohOp::MemWriteback:
        case CohOp::MemData:
            return true;
        default:
            return false;
    }
}

constexpr MsgKind kind_of(CohOp op) {
    switch (op) {
        case CohOp::GetS:
        case CohOp::GetM:
        case CohOp::MemRead:
            return MsgKind::request;
        case CohOp::FwdGetS:
        case CohOp::FwdGetM:
        case CohOp::Inv:
            return MsgKind::snoop;
        case CohOp::PutS:
        case CohOp::PutE:
        case CohOp::PutM:
        case CohOp::WbData:
        case CohOp::MemWriteback:
            return MsgKind::writeback;
        default:
            return MsgKind::response;
    }
}

struct Msg {
    CohOp op = CohOp::GetS;
    AgentId src = kInvalidAgent;
    AgentId dst = kInvalidAgent;
    // For forwarded snoops: the agent that should receive data/acks.
    AgentId requester = kInvalidAgent;
    Addr addr = 0;  // line-aligned
    std::uint64_t txn = 0;
    // For DataM/GrantM: invalidation acks the requester must collect.
    std::uint32_t ack_count = 0;
    // Data messages: whether the line is dirty relative to memory.
    bool dirty = false;
    std::array<std::uint8_t, kLineBytes> data{};

    std::uint32_t payload_bytes() const { return carries_line_data(op) ? kLineBytes : 8u; }
};

}  // namespace tilesim
