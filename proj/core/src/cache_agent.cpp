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

#include "tilesim/cache_agent.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "tilesim/noc.hpp"

namespace tilesim {

namespace {

void apply_masked(CacheLine& line, const std::array<std::uint8_t, kLineBytes>& wdata,
                  std::uint64_t wmask) {
    for (std::uint32_t i = 0; i < kLineBytes; ++i) {
        if (wmask & (1ull << i)) line.data[i] = wdata[i];
    }
}

bool is_demand(CacheReq::Kind k) { return k != CacheReq::Kind::prefetch; }

}  // namespace

CacheAgent::CacheAgent(Kernel& kernel, Noc& noc, StatRegistry& stats, const std::string& prefix,
                       AgentId self, std::uint32_t peer_index, const Layout& layout,
                       const ClockDomain& clk, std::function<AgentId(Addr)> home_of)
    : kernel_(kernel),
      noc_(noc),
      self_(self),
      peer_index_(peer_index),
      layout_(layout),
      clk_(clk),
      home_of_(std::move(home_of)),
      l1i_(layout.has_l1 ? layout.l1i : CacheGeometry{kLineBytes, 1}),
      l1d_(layout.has_l1 ? layout.l1d : CacheGeometry{kLineBytes, 1}),
      l2_(layout.l2),
      pf_l1d_(layout.stride),
      pf_l2_(layout.stride) {
    l1i_hits_ = stats.counter(prefix + ".l1i.hits");
    l1i_misses_ = stats.counter(prefix + ".l1i.misses");
    l1d_hits_ = stats.counter(prefix + ".l1d.hits");
    l1d_misses_ = stats.counter(prefix + ".l1d.misses");
    l2_hits_ = stats.counter(prefix + ".l2.hits");
    l2_misses_ = stats.counter(prefix + ".l2.misses");
    l2_evictions_ = stats.counter(prefix + ".l2.evictions");
    pf_issued_ = stats.counter(prefix + ".prefetch.issued");
    pf_useful_ = stats.counter(prefix + ".prefetch.useful");
    pf_dropped_ = stats.counter(prefix + ".prefetch.dropped");
    pf_merged_ = stats.counter(prefix + ".prefetch.hit_under_fill");
    parks_ = stats.counter(prefix + ".parked");
    wb_highwater_ = stats.counter(prefix + ".wb_highwater");
    hit_replays_ = stats.counter(prefix + ".hit_replays");
}

void CacheAgent::send(Msg m) const {
    m.src = self_;
    noc_.send(m);
}

void CacheAgent::access(CacheReq req) {
    assert(line_offset(req.paddr) + req.size <= kLineBytes && "request crosses a line");
    if (!parked_.empty() && !draining_parked_) {
        // Preserve arrival order behind already-parked requests.
        if (req.kind == CacheReq::Kind::prefetch) {
            *pf_dropped_ += 1;
            return;
        }
        park(std::move(req));
        return;
    }
    try_start(std::move(req));
}

void CacheAgent::park(CacheReq&& req) {
    *parks_ += 1;
    parked_.push_back(std::move(req));
}

void CacheAgent::retry_parked() {
    if (draining_parked_ || parked_.empty()) return;
    draining_parked_ = true;
    std::size_t n = parked_.size();
    while (n-- > 0 && !parked_.empty()) {
        CacheReq req = std::move(parked_.front());
        parked_.pop_front();
        try_start(std::move(req));
    }
    draining_parked_ = false;
}

void CacheAgent::try_start(CacheReq&& req) {
    const Addr line = req.line();

    for (const WbEntry& e : wb_) {
        if (e.line == line) {
            if (req.kind == CacheReq::Kind::prefetch) {
                // The data is right here; treat as an instant hit.
                *pf_dropped_ += 1;
                if (req.done) {
                    CacheResp resp{req.paddr, e.data, kernel_.now()};
                    kernel_.schedule_in(0, [req = std::move(req), resp] { req.done(resp); });
                }
                return;
            }
            park(std::move(req));
            return;
        }
    }

    if (req.kind == CacheReq::Kind::prefetch) {
        start_prefetch(std::move(req));
        return;
    }

    if (!layout_.has_l1) {
        l2_stage(std::move(req));
        return;
    }

    const bool via_l1i = req.kind == CacheReq::Kind::ifetch;
    std::uint32_t& inflight = via_l1i ? inflight_i_ : inflight_d_;
    const std::uint32_t cap = via_l1i ? layout_.l1i.mshrs : layout_.l1d.mshrs;
    if (inflight >= cap) {
        park(std::move(req));
        return;
    }
    ++inflight;

    CacheArray& l1 = via_l1i ? l1i_ : l1d_;
    CacheLine* l1line = l1.find(line);
    if (req.kind == CacheReq::Kind::read) {
        observe_prefetcher(pf_l1d_, true, req.stream_id, line);
    }

    bool hit = l1line != nullptr;
    if (hit && req.kind == CacheReq::Kind::write) {
        CacheLine* l2line = l2_.find(line);
        assert(l2line && "L1 content must be in L2");
        hit = l2line->state == LineState::E || l2line->state == LineState::M;
    }
    if (hit) {
        (via_l1i ? *l1i_hits_ : *l1d_hits_) += 1;
        l1.touch(*l1line);
        const SimTime lat = clk_.cycles(via_l1i ? layout_.l1i.hit_latency : layout_.l1d.hit_latency);
        kernel_.schedule_in(lat, [this, req = std::move(req), via_l1i]() mutable {
            complete_l1_hit(std::move(req), via_l1i);
        });
    } else {
        (via_l1i ? *l1i_misses_ : *l1d_misses_) += 1;
        const SimTime lat = clk_.cycles(via_l1i ? layout_.l1i.tag_latency : layout_.l1d.tag_latency);
        kernel_.schedule_in(lat, [this, req = std::move(req)]() mutable { l2_stage(std::move(req)); });
    }
}

void CacheAgent::complete_l1_hit(CacheReq&& req, bool via_l1i) {
    CacheLine* l2line = l2_.find(req.line());
    // A snoop or eviction can take the line away inside the hit window; the
    // access then replays through the normal arbitration path.
    if (!l2line || (req.kind == CacheReq::Kind::write && l2line->state == LineState::S)) {
        *hit_replays_ += 1;
        release_slot(req.kind, via_l1i);
        try_start(std::move(req));
        return;
    }
    l2_.touch(*l2line);
    if (l2line->prefetched) {
        l2line->prefetched = false;
        *pf_useful_ += 1;
    }
    if (req.kind == CacheReq::Kind::write) {
        assert(l2line->state == LineState::E || l2line->state == LineState::M);
        l2line->state = LineState::M;
        l2line->dirty = true;
        apply_masked(*l2line, req.wdata, req.wmask);
    }
    release_slot(req.kind, via_l1i);
    finish_one(req, *l2line);
}

void CacheAgent::l2_stage(CacheReq&& req) {
    const Addr line = req.line();
    if (req.kind == CacheReq::Kind::read) {
        observe_prefetcher(pf_l2_, false, req.stream_id, line);
    }

    CacheLine* l2line = l2_.find(line);
    const bool needs_m = req.kind == CacheReq::Kind::write;
    if (l2line && (!needs_m || l2line->state != LineState::S)) {
        *l2_hits_ += 1;
        l2_.touch(*l2line);
        if (l2line->prefetched) {
            l2line->prefetched = false;
            *pf_useful_ += 1;
        }
        kernel_.schedule_in(clk_.cycles(layout_.l2.hit_latency),
                            [this, req = std::move(req)]() mutable { complete_l2_hit(std::move(req)); });
        return;
    }

    *l2_misses_ += 1;
    auto it = mshrs_.find(line);
    if (it != mshrs_.end()) {
        Mshr& m = it->second;
        if (needs_m && !m.is_write) {
            // A read fetch is in flight; the store retries once it lands.
            release_slot(req.kind, false);
            park(std::move(req));
            return;
        }
        if (m.alloc_kind == CacheReq::Kind::prefetch && is_demand(req.kind)) *pf_merged_ += 1;
        if (req.kind == CacheReq::Kind::ifetch) m.fill_l1i = true;
        else m.fill_l1d = true;
        m.waiters.push_back(std::move(req));
        return;
    }

    if (mshrs_.size() >= layout_.l2.mshrs) {
        release_slot(req.kind, req.kind == CacheReq::Kind::ifetch);
        park(std::move(req));
        return;
    }

    allocate_mshr(std::move(req), needs_m);
}

void CacheAgent::allocate_mshr(CacheReq&& req, bool is_write) {
    const Addr line = req.line();
    Mshr m;
    m.line = line;
    m.is_write = is_write;
    m.txn = (static_cast<std::uint64_t>(self_) << 40) | next_txn_++;
    m.alloc_kind = req.kind;
    if (req.kind == CacheReq::Kind::ifetch) m.fill_l1i = true;
    else if (is_demand(req.kind) || req.pf_level == 1) m.fill_l1d = true;
    m.waiters.push_back(std::move(req));

    Msg get;
    get.op = is_write ? CohOp::GetM : CohOp::GetS;
    get.dst = home_of_(line);
    get.addr = line;
    get.txn = m.txn;
    const SimTime lat = clk_.cycles(layout_.l2.tag_latency);
    mshrs_.emplace(line, std::move(m));
    kernel_.schedule_in(lat, [this, get] { send(get); });
}

void CacheAgent::start_prefetch(CacheReq&& req) {
    const Addr line = req.line();
    CacheLine* l2line = l2_.find(line);
    if (l2line) {
        *pf_dropped_ += 1;
        if (req.pf_level == 1 && layout_.has_l1 && !l1d_.find(line)) fill_l1(l1d_, line);
        if (req.done) {
            CacheResp resp{req.paddr, l2line->data, kernel_.now()};
            kernel_.schedule_in(0, [req = std::move(req), resp] { req.done(resp); });
        }
        return;
    }
    auto it = mshrs_.find(line);
    if (it != mshrs_.end()) {
        *pf_dropped_ += 1;
        if (req.pf_level == 1) it->second.fill_l1d = true;
        if (req.done) it->second.waiters.push_back(std::move(req));
        return;
    }
    if (mshrs_.size() >= layout_.l2.mshrs) {
        *pf_dropped_ += 1;
        return;
    }
    *pf_issued_ += 1;
    allocate_mshr(std::move(req), false);
}

void CacheAgent::observe_prefetcher(StridePrefetcher& pf, bool to_l1, std::uint64_t stream,
                                    Addr line_addr) {
    for (Addr target : pf.observe(stream, line_addr)) {
        if (target >= layout_.phys_limit) continue;
        CacheReq p;
        p.kind = CacheReq::Kind::prefetch;
        p.paddr = target;
        p.size = kLineBytes;
        p.pf_level = to_l1 ? 1 : 2;
        kernel_.schedule_in(0, [this, p]() mutable { access(std::move(p)); });
    }
}

void CacheAgent::complete_l2_hit(CacheReq&& req) {
    CacheLine* line = l2_.find(req.line());
    if (!line || (req.kind == CacheReq::Kind::write && line->state == LineState::S)) {
        *hit_replays_ += 1;
        release_slot(req.kind, req.kind == CacheReq::Kind::ifetch);
        try_start(std::move(req));
        return;
    }
    if (layout_.has_l1) {
        if (req.kind == CacheReq::Kind::ifetch) fill_l1(l1i_, req.line());
        else fill_l1(l1d_, req.line());
    }
    if (req.kind == CacheReq::Kind::write) {
        assert(line->state == LineState::E || line->state == LineState::M);
        line->state = LineState::M;
        line->dirty = true;
        apply_masked(*line, req.wdata, req.wmask);
    }
    release_slot(req.kind, req.kind == CacheReq::Kind::ifetch);
    finish_one(req, *line);
}

void CacheAgent::fill_l1(CacheArray& l1, Addr line_addr) {
    if (l1.find(line_addr)) return;
    CacheLine* slot = l1.victim_for(line_addr);
    // L1 lines are a clean mirror of L2; replacement is silent.
    slot->addr = line_addr;
    slot->state = LineState::S;
    slot->dirty = false;
    slot->prefetched = false;
    l1.touch(*slot);
}

void CacheAgent::back_invalidate_l1(Addr line_addr) {
    if (!layout_.has_l1) return;
    if (CacheLine* l = l1d_.find(line_addr)) l1d_.invalidate(*l);
    if (CacheLine* l = l1i_.find(line_addr)) l1i_.invalidate(*l);
}

void CacheAgent::finish_one(const CacheReq& req, CacheLine& line) {
    if (on_complete) on_complete(req, line.data);
    if (req.done) {
        CacheResp resp{req.paddr, line.data, kernel_.now()};
        req.done(resp);
    }
    retry_parked();
}

std::uint64_t CacheAgent::release_slot(CacheReq::Kind kind, bool via_l1i) {
    if (!layout_.has_l1 || kind == CacheReq::Kind::prefetch) return 0;
    std::uint32_t& inflight = via_l1i ? inflight_i_ : inflight_d_;
    assert(inflight > 0);
    --inflight;
    return inflight;
}

void CacheAgent::evict(CacheLine& line) {
    *l2_evictions_ += 1;
    WbEntry e;
    e.line = line.addr;
    e.data = line.data;
    e.dirty = line.dirty;
    e.was_owner = line.state != LineState::S;
    e.txn = (static_cast<std::uint64_t>(self_) << 40) | next_txn_++;
    back_invalidate_l1(line.addr);

    Msg put;
    put.op = line.state == LineState::S ? CohOp::PutS
             : line.state == LineState::E ? CohOp::PutE
                                          : CohOp::PutM;
    put.dst = home_of_(line.addr);
    put.addr = line.addr;
    put.txn = e.txn;
    put.data = line.data;
    put.dirty = line.dirty;

    wb_.push_back(e);
    if (wb_.size() > *wb_highwater_) *wb_highwater_ = wb_.size();
    l2_.invalidate(line);
    send(put);
}

void CacheAgent::flush_all() {
    assert(mshrs_.empty() && "flush_all requires a quiesced agent");
    l2_.for_each_valid([this](const CacheLine& l) {
        evict(const_cast<CacheLine&>(l));
    });
}

void CacheAgent::handle(const Msg& msg) {
    switch (msg.op) {
        case CohOp::DataS:
        case CohOp::DataE:
        case CohOp::DataM: {
            auto it = mshrs_.find(msg.addr);
            if (it == mshrs_.end()) throw std::logic_error("data response without MSHR");
            Mshr& m = it->second;
            m.data_seen = true;
            m.data = msg.data;
            m.grant_dirty = msg.dirty;
            m.grant_state = msg.op == CohOp::DataS ? LineState::S
                            : msg.op == CohOp::DataE ? LineState::E
                                                     : LineState::M;
            m.acks_needed += static_cast<int>(msg.ack_count);
            maybe_complete(m);
            break;
        }
        case CohOp::GrantM: {
            auto it = mshrs_.find(msg.addr);
            if (it == mshrs_.end()) throw std::logic_error("GrantM without MSHR");
            Mshr& m = it->second;
            assert(!m.lost_copy && "upgrade granted after losing the Shared copy");
            m.grant_seen = true;
            m.acks_needed += static_cast<int>(msg.ack_count);
            maybe_complete(m);
            break;
        }
        case CohOp::InvAck: {
            auto it = mshrs_.find(msg.addr);
            if (it == mshrs_.end()) throw std::logic_error("InvAck without MSHR");
            Mshr& m = it->second;
            m.acks_needed -= 1;
            maybe_complete(m);
            break;
        }
        case CohOp::FwdGetS:
        case CohOp::FwdGetM:
        case CohOp::Inv: {
            const Msg copy = msg;
            kernel_.schedule_in(clk_.cycles(layout_.l2.tag_latency), [this, copy] { snoop(copy); });
            break;
        }
        case CohOp::PutAck: {
            auto it = std::find_if(wb_.begin(), wb_.end(),
                                   [&](const WbEntry& e) { return e.txn == msg.txn; });
            if (it == wb_.end()) throw std::logic_error("PutAck without writeback entry");
            wb_.erase(it);
            retry_parked();
            break;
        }
        default:
            throw std::logic_error("cache agent received unexpected message");
    }
}

void CacheAgent::snoop(const Msg& msg) {
    CacheLine* line = l2_.find(msg.addr);
    if (line) {
        switch (msg.op) {
            case CohOp::FwdGetS: {
                assert(line->state == LineState::E || line->state == LineState::M);
                Msg data;
                data.op = CohOp::DataS;
                data.dst = msg.requester;
                data.addr = msg.addr;
                data.txn = msg.txn;
                data.data = line->data;
                send(data);
                if (line->dirty) {
                    Msg wb;
                    wb.op = CohOp::WbData;
                    wb.dst = msg.src;
                    wb.addr = msg.addr;
                    wb.data = line->data;
                    send(wb);
                }
                line->state = LineState::S;
                line->dirty = false;
                break;
            }
            case CohOp::FwdGetM: {
                assert(line->state == LineState::E || line->state == LineState::M);
                Msg data;
                data.op = CohOp::DataM;
                data.dst = msg.requester;
                data.addr = msg.addr;
                data.txn = msg.txn;
                data.data = line->data;
                data.dirty = line->dirty;
                send(data);
                back_invalidate_l1(msg.addr);
                l2_.invalidate(*line);
                break;
            }
            case CohOp::Inv: {
                assert(line->state == LineState::S);
                back_invalidate_l1(msg.addr);
                l2_.invalidate(*line);
                auto it = mshrs_.find(msg.addr);
                if (it != mshrs_.end()) it->second.lost_copy = true;
                Msg ack;
                ack.op = CohOp::InvAck;
                ack.dst = msg.requester;
                ack.addr = msg.addr;
                ack.txn = msg.txn;
                send(ack);
                break;
            }
            default:
                throw std::logic_error("unexpected snoop op");
        }
        return;
    }

    auto it = std::find_if(wb_.begin(), wb_.end(),
                           [&](const WbEntry& e) { return e.line == msg.addr; });
    if (it == wb_.end()) throw std::logic_error("snoop for a line this agent does not hold");
    WbEntry& e = *it;
    switch (msg.op) {
        case CohOp::FwdGetS: {
            Msg data;
            data.op = CohOp::DataS;
            data.dst = msg.requester;
            data.addr = msg.addr;
            data.txn = msg.txn;
            data.data = e.data;
            send(data);
            if (e.dirty && e.was_owner && !e.downgraded) {
                Msg wb;
                wb.op = CohOp::WbData;
                wb.dst = msg.src;
                wb.addr = msg.addr;
                wb.data = e.data;
                send(wb);
            }
            e.downgraded = true;
            break;
        }
        case CohOp::FwdGetM: {
            assert(e.was_owner && !e.downgraded);
            Msg data;
            data.op = CohOp::DataM;
            data.dst = msg.requester;
            data.addr = msg.addr;
            data.txn = msg.txn;
            data.data = e.data;
            data.dirty = e.dirty;
            send(data);
            e.downgraded = true;
            break;
        }
        case CohOp::Inv: {
            Msg ack;
            ack.op = CohOp::InvAck;
            ack.dst = msg.requester;
            ack.addr = msg.addr;
            ack.txn = msg.txn;
            send(ack);
            e.downgraded = true;
            break;
        }
        default:
            throw std::logic_error("unexpected snoop op");
    }
}

void CacheAgent::maybe_complete(Mshr& m) {
    if (m.acks_needed != 0) return;
    if (!m.data_seen && !m.grant_seen) return;
    Mshr taken = std::move(m);
    mshrs_.erase(taken.line);
    install_and_finish(std::move(taken));
    if (!stalled_installs_.empty()) {
        std::vector<Mshr> retry = std::move(stalled_installs_);
        stalled_installs_.clear();
        for (Mshr& s : retry) install_and_finish(std::move(s));
    }
    retry_parked();
}

void CacheAgent::install_and_finish(Mshr m) {
    CacheLine* slot = nullptr;
    if (m.grant_seen) {
        slot = l2_.find(m.line);
        assert(slot && slot->state == LineState::S && "upgrade without a Shared copy");
        slot->state = LineState::M;
        slot->dirty = true;
        l2_.touch(*slot);
    } else {
        assert(!l2_.find(m.line) && "fill for a line already present");
        // Lines with an in-flight upgrade of their own are pinned: evicting
        // one would strand its pending GrantM.
        CacheLine* victim = l2_.victim_for_if(
            m.line, [this](const CacheLine& c) { return !c.valid() || !mshrs_.count(c.addr); });
        if (!victim) {
            stalled_installs_.push_back(std::move(m));
            return;
        }
        if (victim->valid()) evict(*victim);
        slot = victim;
        slot->addr = m.line;
        slot->state = m.grant_state == LineState::M ? LineState::M : m.grant_state;
        slot->dirty = m.grant_state == LineState::M;
        slot->data = m.data;
        bool demand_waiter = false;
        for (const CacheReq& w : m.waiters) demand_waiter |= is_demand(w.kind);
        slot->prefetched = m.alloc_kind == CacheReq::Kind::prefetch && !demand_waiter;
        l2_.touch(*slot);
    }

    if (layout_.has_l1) {
        if (m.fill_l1d) fill_l1(l1d_, m.line);
        if (m.fill_l1i) fill_l1(l1i_, m.line);
    }

    Msg unblock;
    unblock.op = CohOp::Unblock;
    unblock.dst = home_of_(m.line);
    unblock.addr = m.line;
    unblock.txn = m.txn;
    send(unblock);

    for (CacheReq& w : m.waiters) {
        if (w.kind == CacheReq::Kind::write) {
            assert(slot->state == LineState::M);
            apply_masked(*slot, w.wdata, w.wmask);
            slot->dirty = true;
        }
        release_slot(w.kind, w.kind == CacheReq::Kind::ifetch);
        finish_one(w, *slot);
    }
}

}  // namespace tilesim
