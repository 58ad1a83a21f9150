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

#include "tilesim/home_slice.hpp"

#include <bit>
#include <cassert>
#include <stdexcept>

#include "tilesim/noc.hpp"

namespace tilesim {

HomeSlice::HomeSlice(Kernel& kernel, Noc& noc, StatRegistry& stats, AgentId self,
                     const CacheGeometry& l3_geo, const ClockDomain& clk,
                     std::vector<AgentId> peers, std::function<AgentId(Addr)> mem_agent_of)
    : kernel_(kernel),
      noc_(noc),
      self_(self),
      l3_(l3_geo),
      lookup_ticks_(clk.cycles(l3_geo.hit_latency)),
      peers_(std::move(peers)),
      mem_agent_of_(std::move(mem_agent_of)) {
    l3_hits_ = stats.counter("l3.hits");
    l3_misses_ = stats.counter("l3.misses");
    l3_fills_ = stats.counter("l3.fills");
    l3_evictions_ = stats.counter("l3.evictions");
    l3_writebacks_ = stats.counter("l3.writebacks");
    stale_puts_ = stats.counter("l3.stale_puts");
    txns_ = stats.counter("l3.transactions");
}

std::uint8_t HomeSlice::peer_index(AgentId agent) const {
    for (std::size_t i = 0; i < peers_.size(); ++i) {
        if (peers_[i] == agent) return static_cast<std::uint8_t>(i);
    }
    throw std::logic_error("message from agent that is not a directory peer");
}

void HomeSlice::send(Msg m) const {
    m.src = self_;
    noc_.send(m);
}

bool HomeSlice::idle() const {
    for (const auto& [addr, e] : dir_) {
        if (e.busy || !e.waiting.empty()) return false;
    }
    return true;
}

void HomeSlice::snapshot(std::map<Addr, DirView>& out) const {
    for (const auto& [addr, e] : dir_) {
        DirView v;
        v.sharers = e.sharers;
        if (e.owner) v.owner = *e.owner;
        v.busy = e.busy;
        out[addr] = v;
    }
}

void HomeSlice::handle(const Msg& msg) {
    switch (msg.op) {
        case CohOp::GetS:
        case CohOp::GetM:
        case CohOp::PutS:
        case CohOp::PutE:
        case CohOp::PutM: {
            DirEntry& e = dir_[msg.addr];
            if (e.busy) {
                e.waiting.push_back(msg);
            } else {
                start(msg);
            }
            break;
        }
        case CohOp::Unblock: {
            auto it = dir_.find(msg.addr);
            if (it == dir_.end() || !it->second.busy || it->second.pending.txn != msg.txn) {
                throw std::logic_error("Unblock without matching transaction");
            }
            DirEntry& e = it->second;
            e.sharers = e.pending.final_sharers;
            e.owner = e.pending.final_owner;
            finish(e, msg.addr);
            break;
        }
        case CohOp::WbData: {
            // Dirty data handed over on a downgrade goes straight to memory.
            // Ordering safety: the memory channel is FIFO and any later read
            // of this line funnels through this home after this point.
            Msg wb;
            wb.op = CohOp::MemWriteback;
            wb.dst = mem_agent_of_(msg.addr);
            wb.addr = msg.addr;
            wb.data = msg.data;
            send(wb);
            break;
        }
        case CohOp::MemData: {
            auto it = dir_.find(msg.addr);
            if (it == dir_.end() || !it->second.busy || !it->second.pending.want_mem) {
                throw std::logic_error("MemData without waiting transaction");
            }
            Pending& p = it->second.pending;
            p.want_mem = false;
            Msg grant;
            grant.dst = p.requester;
            grant.addr = msg.addr;
            grant.txn = p.txn;
            grant.data = msg.data;
            if (p.is_getm) {
                grant.op = CohOp::DataM;
                grant.ack_count = p.mem_acks;
                grant.dirty = true;
            } else {
                grant.op = CohOp::DataE;
            }
            send(grant);
            break;
        }
        default:
            throw std::logic_error("home slice received unexpected message");
    }
}

void HomeSlice::start(const Msg& msg) {
    DirEntry& e = dir_[msg.addr];
    assert(!e.busy);
    e.busy = true;
    if (msg.op == CohOp::GetS || msg.op == CohOp::GetM) {
        *txns_ += 1;
        e.pending = Pending{};
        e.pending.requester = msg.src;
        e.pending.txn = msg.txn;
        e.pending.is_getm = msg.op == CohOp::GetM;
        const Msg copy = msg;
        kernel_.schedule_in(lookup_ticks_, [this, copy] { decide_get(copy); });
    } else {
        const Msg copy = msg;
        kernel_.schedule_in(lookup_ticks_, [this, copy] { apply_put(copy); });
    }
}

void HomeSlice::decide_get(const Msg& msg) {
    DirEntry& e = dir_[msg.addr];
    Pending& p = e.pending;
    const std::uint8_t req_peer = peer_index(msg.src);
    const std::uint32_t req_bit = 1u << req_peer;

    if (CacheLine* l3line = l3_.find(msg.addr)) {
        // Victim hit: promote to the requester and drop our copy.
        assert(e.sharers == 0 && !e.owner && "L3 copy coexisting with private copies");
        *l3_hits_ += 1;
        Msg grant;
        grant.dst = msg.src;
        grant.addr = msg.addr;
        grant.txn = p.txn;
        grant.data = l3line->data;
        if (l3line->dirty) {
            grant.op = CohOp::DataM;
            grant.dirty = true;
        } else {
            grant.op = p.is_getm ? CohOp::DataM : CohOp::DataE;
        }
        l3_.invalidate(*l3line);
        p.final_owner = req_peer;
        p.final_sharers = 0;
        send(grant);
        return;
    }
    *l3_misses_ += 1;

    if (e.owner) {
        assert(e.sharers == 0);
        assert(*e.owner != req_peer && "owner re-requesting its own line");
        Msg fwd;
        fwd.op = p.is_getm ? CohOp::FwdGetM : CohOp::FwdGetS;
        fwd.dst = peers_[*e.owner];
        fwd.requester = msg.src;
        fwd.addr = msg.addr;
        fwd.txn = p.txn;
        if (p.is_getm) {
            p.final_owner = req_peer;
            p.final_sharers = 0;
        } else {
            p.final_owner.reset();
            p.final_sharers = (1u << *e.owner) | req_bit;
        }
        send(fwd);
        return;
    }

    if (e.sharers != 0) {
        if (!p.is_getm) {
            assert((e.sharers & req_bit) == 0 && "sharer re-requesting readable line");
            // Forward from the lowest-index sharer; it stays Shared.
            const std::uint8_t fwd_peer = static_cast<std::uint8_t>(std::countr_zero(e.sharers));
            Msg fwd;
            fwd.op = CohOp::FwdGetS;
            fwd.dst = peers_[fwd_peer];
            fwd.requester = msg.src;
            fwd.addr = msg.addr;
            fwd.txn = p.txn;
            p.final_owner.reset();
            p.final_sharers = e.sharers | req_bit;
            send(fwd);
            return;
        }
        const std::uint32_t others = e.sharers & ~req_bit;
        for (std::uint32_t rest = others; rest != 0; rest &= rest - 1) {
            const std::uint8_t peer = static_cast<std::uint8_t>(std::countr_zero(rest));
            Msg inv;
            inv.op = CohOp::Inv;
            inv.dst = peers_[peer];
            inv.requester = msg.src;
            inv.addr = msg.addr;
            inv.txn = p.txn;
            send(inv);
        }
        p.final_owner = req_peer;
        p.final_sharers = 0;
        if (e.sharers & req_bit) {
            // Upgrade: requester keeps its data and waits for acks only.
            Msg grant;
            grant.op = CohOp::GrantM;
            grant.dst = msg.src;
            grant.addr = msg.addr;
            grant.txn = p.txn;
            grant.ack_count = static_cast<std::uint32_t>(std::popcount(others));
            send(grant);
        } else {
            p.want_mem = true;
            p.mem_acks = static_cast<std::uint32_t>(std::popcount(others));
            Msg rd;
            rd.op = CohOp::MemRead;
            rd.dst = mem_agent_of_(msg.addr);
            rd.addr = msg.addr;
            rd.txn = p.txn;
            send(rd);
        }
        return;
    }

    // Uncached anywhere: memory supplies the line.
    p.final_owner = req_peer;
    p.final_sharers = 0;
    p.want_mem = true;
    p.mem_acks = 0;
    Msg rd;
    rd.op = CohOp::MemRead;
    rd.dst = mem_agent_of_(msg.addr);
    rd.addr = msg.addr;
    rd.txn = p.txn;
    send(rd);
}

void HomeSlice::apply_put(const Msg& msg) {
    DirEntry& e = dir_[msg.addr];
    const std::uint8_t peer = peer_index(msg.src);
    const std::uint32_t bit = 1u << peer;

    bool fill = false;
    bool dirty = false;
    if (msg.op == CohOp::PutS) {
        if (e.sharers & bit) {
            e.sharers &= ~bit;
            fill = e.sharers == 0 && !e.owner;
        } else {
            *stale_puts_ += 1;
        }
    } else {
        if (e.owner && *e.owner == peer) {
            e.owner.reset();
            fill = true;
            dirty = msg.op == CohOp::PutM;
        } else {
            // The line moved on while the put was in flight; the holder has
            // truly dropped its copy either way.
            *stale_puts_ += 1;
            e.sharers &= ~bit;
        }
    }
    if (fill) fill_l3(msg.addr, msg.data, dirty);

    Msg ack;
    ack.op = CohOp::PutAck;
    ack.dst = msg.src;
    ack.addr = msg.addr;
    ack.txn = msg.txn;
    send(ack);
    finish(e, msg.addr);
}

void HomeSlice::fill_l3(Addr addr, const std::array<std::uint8_t, kLineBytes>& data, bool dirty) {
    CacheLine* victim = l3_.victim_for(addr);
    if (victim->valid()) {
        *l3_evictions_ += 1;
        if (victim->dirty) {
            *l3_writebacks_ += 1;
            Msg wb;
            wb.op = CohOp::MemWriteback;
            wb.dst = mem_agent_of_(victim->addr);
            wb.addr = victim->addr;
            wb.data = victim->data;
            send(wb);
        }
        l3_.invalidate(*victim);
    }
    victim->addr = addr;
    victim->state = LineState::S;
    victim->dirty = dirty;
    victim->data = data;
    l3_.touch(*victim);
    *l3_fills_ += 1;
}

void HomeSlice::finish(DirEntry& e, Addr addr) {
    e.busy = false;
    e.pending = Pending{};
    while (!e.waiting.empty() && !e.busy) {
        Msg next = e.waiting.front();
        e.waiting.pop_front();
        start(next);
    }
    if (!e.busy && e.waiting.empty() && e.sharers == 0 && !e.owner) {
        dir_.erase(addr);
    }
}

}  // namespace tilesim
