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

#include "tilesim/core_model.hpp"

#include <cassert>
#include <stdexcept>
#include <utility>

namespace tilesim {

MicroOp& MicroOp::depends_on(std::uint64_t seq) {
    for (auto& d : dep) {
        if (d == kNoDep) {
            d = seq;
            return *this;
        }
    }
    throw std::logic_error("micro-op dependency slots exhausted");
}

namespace {

std::uint64_t extract_le(const std::array<std::uint8_t, kLineBytes>& bytes, std::uint32_t offset,
                         std::uint32_t size) {
    std::uint64_t v = 0;
    for (std::uint32_t i = 0; i < size && i < 8; ++i)
        v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
    return v;
}

}  // namespace

CoreModel::CoreModel(Kernel& kernel, const ClockDomain& clk, CacheAgent& cache, Mmu& mmu,
                     const CoreParams& params, StatRegistry& stats, const std::string& prefix)
    : kernel_(kernel),
      clk_(clk),
      cache_(cache),
      mmu_(mmu),
      params_(params),
      retired_(stats.counter(prefix + ".retired")),
      loads_(stats.counter(prefix + ".loads")),
      stores_(stats.counter(prefix + ".stores")),
      uc_loads_(stats.counter(prefix + ".uc_loads")),
      uc_stores_(stats.counter(prefix + ".uc_stores")),
      forwarded_(stats.counter(prefix + ".store_forwards")),
      active_cycles_(stats.counter(prefix + ".active_cycles")),
      load_to_use_(stats.histogram(prefix + ".load_to_use")),
      uc_round_trip_(stats.histogram(prefix + ".uc_round_trip")) {
    if (params_.issue_width == 0 || params_.window == 0 || params_.lsq == 0 ||
        params_.store_fifo == 0 || params_.drain_width == 0)
        throw std::invalid_argument("core parameters must be positive");
}

SimTime CoreModel::edge_at_or_after(SimTime t) const {
    return t % clk_.period() == 0 ? t : clk_.next_edge(t, 1);
}

void CoreModel::start() {
    wake();
}

void CoreModel::wake() {
    if (step_pending_) return;
    step_pending_ = true;
    kernel_.schedule_at(edge_at_or_after(kernel_.now()), [this] { step(); });
}

void CoreModel::step() {
    step_pending_ = false;
    ++*active_cycles_;
    progress_ = false;
    retire();
    dispatch();
    issue();
    drain_stores();
    check_finished();
    if (progress_) wake();
}

CoreModel::Slot* CoreModel::find(std::uint64_t seq) {
    if (seq < front_seq_ || seq >= front_seq_ + window_.size()) return nullptr;
    return &window_[seq - front_seq_];
}

const CoreModel::Slot* CoreModel::find(std::uint64_t seq) const {
    if (seq < front_seq_ || seq >= front_seq_ + window_.size()) return nullptr;
    return &window_[seq - front_seq_];
}

bool CoreModel::overlaps(Addr a, std::uint32_t an, Addr b, std::uint32_t bn) {
    return a < b + bn && b < a + an;
}

bool CoreModel::contains(Addr outer, std::uint32_t on, Addr inner, std::uint32_t in_n) {
    return outer <= inner && inner + in_n <= outer + on;
}

void CoreModel::retire() {
    std::uint32_t n = 0;
    while (!window_.empty() && n < params_.issue_width) {
        Slot& s = window_.front();
        if (s.status != Status::completed) break;
        if (s.op.kind == MicroOp::Kind::store) {
            if (fifo_.size() >= params_.store_fifo) break;
            Drain d;
            d.vaddr = s.op.vaddr;
            d.size = s.op.size;
            d.data = s.op.data;
            d.seq = s.seq;
            fifo_.push_back(std::move(d));
            --stores_in_window_;
        }
        if (is_mem(s.op.kind)) --lsq_used_;
        ++*retired_;
        ++front_seq_;
        window_.pop_front();
        ++n;
        progress_ = true;
    }
}

void CoreModel::dispatch() {
    if (!source_) return;
    while (window_.size() < params_.window) {
        std::optional<MicroOp> op =
            staged_ ? std::exchange(staged_, std::nullopt) : source_->next();
        if (!op) break;
        if (is_mem(op->kind)) {
            if (lsq_used_ >= params_.lsq) {
                staged_ = std::move(op);
                break;
            }
            assert(op->size >= 1 && op->size <= kLineBytes);
            assert(line_of(op->vaddr) == line_of(op->vaddr + op->size - 1));
            ++lsq_used_;
            if (op->kind == MicroOp::Kind::store) ++stores_in_window_;
            if (op->kind == MicroOp::Kind::uc_load || op->kind == MicroOp::Kind::uc_store)
                ++uc_pending_;
        }
        Slot s;
        s.op = std::move(*op);
        s.seq = next_seq_++;
        window_.push_back(std::move(s));
        progress_ = true;
    }
}

bool CoreModel::deps_ready(const Slot& s) const {
    for (std::uint64_t d : s.op.dep) {
        if (d == kNoDep) continue;
        assert(d < s.seq);
        if (d < front_seq_) continue;  // retired, so completed
        const Slot* p = find(d);
        assert(p);
        if (p->status != Status::completed) return false;
    }
    return true;
}

bool CoreModel::uc_may_issue(const Slot& s) const {
    if (!fifo_.empty()) return false;
    for (const Slot& o : window_) {
        if (o.seq >= s.seq) break;
        if (o.op.kind == MicroOp::Kind::store) return false;
        if ((o.op.kind == MicroOp::Kind::uc_load || o.op.kind == MicroOp::Kind::uc_store) &&
            o.status != Status::completed)
            return false;
    }
    return true;
}

CoreModel::LoadPlan CoreModel::plan_load(const Slot& s) const {
    bool older_uc = false;
    // Youngest older store overlapping the load. Fifo entries are all older
    // than window entries, and each container is in program order.
    Addr st_base = 0;
    std::uint32_t st_size = 0;
    const std::array<std::uint8_t, kLineBytes>* st_data = nullptr;
    for (const Drain& d : fifo_) {
        if (overlaps(d.vaddr, d.size, s.op.vaddr, s.op.size)) {
            st_base = d.vaddr;
            st_size = d.size;
            st_data = &d.data;
        }
    }
    for (const Slot& o : window_) {
        if (o.seq >= s.seq) break;
        if ((o.op.kind == MicroOp::Kind::uc_load || o.op.kind == MicroOp::Kind::uc_store) &&
            o.status != Status::completed)
            older_uc = true;
        if (o.op.kind == MicroOp::Kind::store &&
            overlaps(o.op.vaddr, o.op.size, s.op.vaddr, s.op.size)) {
            st_base = o.op.vaddr;
            st_size = o.op.size;
            st_data = &o.op.data;
        }
    }
    LoadPlan plan;
    if (st_data == nullptr) {
        // No conflicting store; bypassing pending uc ops is allowed.
        plan.action = LoadPlan::Action::normal;
        return plan;
    }
    if (older_uc) return plan;  // conflicting load may not bypass a pending uc op
    if (contains(st_base, st_size, s.op.vaddr, s.op.size)) {
        plan.action = LoadPlan::Action::forward;
        plan.value =
            extract_le(*st_data, static_cast<std::uint32_t>(s.op.vaddr - st_base), s.op.size);
        return plan;
    }
    return plan;  // partial overlap: wait until the store reaches the cache
}

void CoreModel::issue() {
    std::uint32_t issued = 0;
    const SimTime now = kernel_.now();
    for (Slot& s : window_) {
        if (issued >= params_.issue_width) break;
        if (s.status != Status::waiting) continue;
        if (!deps_ready(s)) continue;
        switch (s.op.kind) {
            case MicroOp::Kind::compute: {
                s.status = Status::issued;
                s.issue_at = now;
                const std::uint64_t seq = s.seq;
                kernel_.schedule_at(clk_.next_edge(now, s.op.latency),
                                    [this, seq] { complete(seq, 0, false); });
                ++issued;
                break;
            }
            case MicroOp::Kind::store: {
                // Address and data are precomputed; the access itself runs
                // post-retire. Charge one cycle for address generation.
                s.status = Status::issued;
                s.issue_at = now;
                ++*stores_;
                const std::uint64_t seq = s.seq;
                kernel_.schedule_at(clk_.next_edge(now, 1),
                                    [this, seq] { complete(seq, 0, false); });
                ++issued;
                break;
            }
            case MicroOp::Kind::load: {
                const LoadPlan plan = plan_load(s);
                if (plan.action == LoadPlan::Action::blocked) continue;
                s.status = Status::issued;
                s.issue_at = now;
                ++*loads_;
                if (plan.action == LoadPlan::Action::forward) {
                    const std::uint64_t seq = s.seq;
                    const std::uint64_t v = plan.value;
                    ++*forwarded_;
                    load_to_use_->add(1);
                    kernel_.schedule_at(clk_.next_edge(now, 1),
                                        [this, seq, v] { complete(seq, v, true); });
                } else {
                    issue_load(s);
                }
                ++issued;
                break;
            }
            case MicroOp::Kind::uc_load:
            case MicroOp::Kind::uc_store: {
                if (!uc_may_issue(s)) continue;
                issue_uc(s);
                ++issued;
                break;
            }
        }
        progress_ = true;
    }
}

void CoreModel::issue_load(Slot& s) {
    const std::uint64_t seq = s.seq;
    const Addr vaddr = s.op.vaddr;
    mmu_.translate(vaddr, [this, seq](Mmu::Result r) {
        if (r.fault)
            throw std::runtime_error("core load touched unmapped address");
        Slot* sl = find(seq);
        assert(sl && sl->status == Status::issued);
        CacheReq req;
        req.kind = CacheReq::Kind::read;
        req.paddr = r.paddr;
        req.size = sl->op.size;
        req.stream_id = sl->op.stream;
        req.done = [this, seq](const CacheResp& resp) {
            Slot* done_slot = find(seq);
            assert(done_slot);
            const std::uint64_t v =
                extract_le(resp.line, line_offset(resp.paddr), done_slot->op.size);
            load_to_use_->add((resp.completed_at - done_slot->issue_at) / clk_.period());
            complete(seq, v, true);
        };
        cache_.access(std::move(req));
    });
}

void CoreModel::issue_uc(Slot& s) {
    s.status = Status::issued;
    s.issue_at = kernel_.now();
    const bool is_store = s.op.kind == MicroOp::Kind::uc_store;
    ++*(is_store ? uc_stores_ : uc_loads_);
    const std::uint64_t seq = s.seq;
    mmu_.translate(s.op.vaddr, [this, seq, is_store](Mmu::Result r) {
        if (r.fault) throw std::runtime_error("uncacheable op touched unmapped address");
        Slot* sl = find(seq);
        assert(sl && sl->status == Status::issued);
        const bool in_region = uc_.in_region && uc_.in_region(r.paddr);
        if (!in_region) {
            // Outside every registered region: plain memory access.
            CacheReq req;
            req.paddr = r.paddr;
            req.size = sl->op.size;
            if (is_store) {
                req.kind = CacheReq::Kind::write;
                const std::uint32_t off = line_offset(r.paddr);
                for (std::uint32_t i = 0; i < sl->op.size; ++i)
                    req.wdata[off + i] = sl->op.data[i];
                req.wmask = byte_mask(off, sl->op.size);
                req.done = [this, seq](const CacheResp&) { complete(seq, 0, false); };
            } else {
                req.kind = CacheReq::Kind::read;
                req.done = [this, seq](const CacheResp& resp) {
                    Slot* done_slot = find(seq);
                    assert(done_slot);
                    complete(seq, extract_le(resp.line, line_offset(resp.paddr),
                                             done_slot->op.size),
                             true);
                };
            }
            cache_.access(std::move(req));
            return;
        }
        if (is_store) {
            uc_.store(r.paddr, sl->op.data, sl->op.size, [this, seq] {
                Slot* done_slot = find(seq);
                assert(done_slot);
                uc_round_trip_->add((kernel_.now() - done_slot->issue_at) / clk_.period());
                complete(seq, 0, false);
            });
        } else {
            uc_.load(r.paddr, [this, seq](std::uint64_t v) {
                Slot* done_slot = find(seq);
                assert(done_slot);
                uc_round_trip_->add((kernel_.now() - done_slot->issue_at) / clk_.period());
                complete(seq, v, true);
            });
        }
    });
}

void CoreModel::complete(std::uint64_t seq, std::uint64_t value, bool deliver) {
    Slot* s = find(seq);
    assert(s && s->status == Status::issued);
    s->status = Status::completed;
    if (s->op.kind == MicroOp::Kind::uc_load || s->op.kind == MicroOp::Kind::uc_store) {
        assert(uc_pending_ > 0);
        --uc_pending_;
    }
    if (deliver && s->op.on_value) s->op.on_value(value);
    progress_ = true;
    wake();
}

void CoreModel::drain_stores() {
    std::size_t scanned = 0;
    for (auto it = fifo_.begin(); it != fifo_.end(); ++it, ++scanned) {
        if (drains_inflight_ >= params_.drain_width) break;
        if (it->inflight) continue;
        bool conflict = false;
        for (auto ej = fifo_.begin(); ej != it; ++ej) {
            if (ej->inflight && line_of(ej->vaddr) == line_of(it->vaddr)) {
                conflict = true;
                break;
            }
        }
        if (conflict) continue;
        it->inflight = true;
        ++drains_inflight_;
        const std::uint64_t seq = it->seq;
        mmu_.translate(it->vaddr, [this, seq](Mmu::Result r) {
            if (r.fault) throw std::runtime_error("core store touched unmapped address");
            auto dit = fifo_.begin();
            while (dit != fifo_.end() && dit->seq != seq) ++dit;
            assert(dit != fifo_.end());
            CacheReq req;
            req.kind = CacheReq::Kind::write;
            req.paddr = r.paddr;
            req.size = dit->size;
            const std::uint32_t off = line_offset(r.paddr);
            for (std::uint32_t i = 0; i < dit->size; ++i) req.wdata[off + i] = dit->data[i];
            req.wmask = byte_mask(off, dit->size);
            req.done = [this, seq](const CacheResp&) {
                auto fit = fifo_.begin();
                while (fit != fifo_.end() && fit->seq != seq) ++fit;
                assert(fit != fifo_.end());
                fifo_.erase(fit);
                assert(drains_inflight_ > 0);
                --drains_inflight_;
                progress_ = true;
                wake();
            };
            cache_.access(std::move(req));
        });
    }
}

bool CoreModel::finished() const {
    return (!source_ || source_->finished()) && window_.empty() && !staged_ && fifo_.empty();
}

void CoreModel::check_finished() {
    if (finished_reported_ || !finished()) return;
    finished_reported_ = true;
    if (on_finished) on_finished();
}

Mmu::WalkReader cache_walk_reader(CacheAgent& agent) {
    return [&agent](Addr paddr, std::function<void(std::uint64_t)> done) {
        CacheReq req;
        req.kind = CacheReq::Kind::ptw_read;
        req.paddr = paddr;
        req.size = 8;
        req.done = [done = std::move(done)](const CacheResp& resp) {
            done(extract_le(resp.line, line_offset(resp.paddr), 8));
        };
        agent.access(std::move(req));
    };
}

}  // namespace tilesim
