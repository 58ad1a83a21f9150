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

#include "tilesim/mmu.hpp"

#include <cassert>
#include <stdexcept>

namespace tilesim {

Mmu::Mmu(Kernel& kernel, const ClockDomain& clk, const AddressSpace& space, MmuParams params,
         WalkReader read_qword, StatRegistry& stats, const std::string& prefix)
    : kernel_(kernel),
      clk_(clk),
      space_(space),
      params_(params),
      read_qword_(std::move(read_qword)),
      hits_(stats.counter(prefix + ".tlb_hits")),
      misses_(stats.counter(prefix + ".tlb_misses")),
      walk_reads_(stats.counter(prefix + ".walk_reads")),
      faults_(stats.counter(prefix + ".faults")) {
    if (params_.tlb_entries == 0) throw std::invalid_argument("tlb_entries must be positive");
    if (params_.timed && !read_qword_) throw std::invalid_argument("timed mmu needs a walk reader");
}

Mmu::Result Mmu::translate_now(Addr vaddr) const {
    auto t = space_.translate(vaddr);
    if (!t) return Result{true, 0};
    return Result{false, t->paddr};
}

const Mmu::TlbEntry* Mmu::lookup(Addr vaddr) {
    for (auto& e : tlb_) {
        if ((vaddr & ~((1ull << e.page_shift) - 1)) == e.vbase) {
            e.stamp = ++stamp_;
            return &e;
        }
    }
    return nullptr;
}

void Mmu::insert(Addr vaddr, const Translation& t) {
    TlbEntry e;
    e.page_shift = t.page_shift;
    e.vbase = vaddr & ~((1ull << t.page_shift) - 1);
    e.pbase = t.paddr & ~((1ull << t.page_shift) - 1);
    e.stamp = ++stamp_;
    if (tlb_.size() < params_.tlb_entries) {
        tlb_.push_back(e);
        return;
    }
    auto* victim = &tlb_[0];
    for (auto& cand : tlb_)
        if (cand.stamp < victim->stamp) victim = &cand;
    *victim = e;
}

void Mmu::translate(Addr vaddr, Callback cb) {
    if (!params_.timed) {
        Result r = translate_now(vaddr);
        if (r.fault) ++*faults_;
        kernel_.schedule_at(kernel_.now(), [cb = std::move(cb), r] { cb(r); });
        return;
    }
    if (const TlbEntry* e = lookup(vaddr)) {
        ++*hits_;
        Result r{false, e->pbase + (vaddr & ((1ull << e->page_shift) - 1))};
        kernel_.schedule_at(clk_.next_edge(kernel_.now(), 1), [cb = std::move(cb), r] { cb(r); });
        return;
    }
    ++*misses_;
    queue_.emplace_back(vaddr, std::move(cb));
    pump();
}

void Mmu::pump() {
    if (walking_ || queue_.empty()) return;
    auto [vaddr, cb] = std::move(queue_.front());
    queue_.pop_front();
    // A walk completed while this request queued may already cover its page.
    if (const TlbEntry* e = lookup(vaddr)) {
        ++*hits_;
        Result r{false, e->pbase + (vaddr & ((1ull << e->page_shift) - 1))};
        kernel_.schedule_at(clk_.next_edge(kernel_.now(), 1), [cb = std::move(cb), r] { cb(r); });
        pump();
        return;
    }
    walking_ = true;
    walk_step(vaddr, space_.root(), 4, cb);
}

void Mmu::walk_step(Addr vaddr, Addr table, int level, const Callback& cb) {
    ++*walk_reads_;
    const Addr entry_addr = table + pt_index(vaddr, level) * 8ull;
    read_qword_(entry_addr, [this, vaddr, level, cb](std::uint64_t pte) {
        if (!(pte & (1ull << kPteShiftPresent))) {
            ++*faults_;
            finish_walk(cb, Result{true, 0});
            return;
        }
        if (level == 2 && (pte & (1ull << kPteShiftHuge))) {
            const Addr base = pte & kPteAddrMask;
            insert(vaddr, Translation{base + (vaddr & (kHugePageBytes - 1)), kHugePageShift});
            finish_walk(cb, Result{false, base + (vaddr & (kHugePageBytes - 1))});
            return;
        }
        if (level == 1) {
            const Addr base = pte & kPteAddrMask;
            insert(vaddr, Translation{base + (vaddr & (kPageBytes - 1)), kPageShift});
            finish_walk(cb, Result{false, base + (vaddr & (kPageBytes - 1))});
            return;
        }
        walk_step(vaddr, pte & kPteAddrMask, level - 1, cb);
    });
}

void Mmu::finish_walk(const Callback& cb, Result r) {
    assert(walking_);
    walking_ = false;
    cb(r);
    pump();
}

}  // namespace tilesim
