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

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "tilesim/kernel.hpp"
#include "tilesim/paging.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

struct MmuParams {
    std::uint32_t tlb_entries = 64;
    bool timed = true;  // false: instant translation, no TLB, no walk traffic
};

// Per-port translation unit: fully associative LRU TLB plus a walker with one
// outstanding walk; further misses queue behind it. Walk reads are ordinary
// cached reads issued through the owner's cache port.
class Mmu {
public:
    struct Result {
        bool fault = false;
        Addr paddr = 0;
    };
    using WalkReader = std::function<void(Addr, std::function<void(std::uint64_t)>)>;
    using Callback = std::function<void(Result)>;

    Mmu(Kernel& kernel, const ClockDomain& clk, const AddressSpace& space, MmuParams params,
        WalkReader read_qword, StatRegistry& stats, const std::string& prefix);

    // Resolves vaddr and invokes cb at the completion tick. TLB hits cost one
    // cycle; misses run the walk and complete with its final read. Faults are
    // never cached, so a later retry after mapping succeeds.
    void translate(Addr vaddr, Callback cb);

    // Reference path: walks the tree in software, zero latency and traffic.
    Result translate_now(Addr vaddr) const;

    bool idle() const { return !walking_ && queue_.empty(); }
    bool timed() const { return params_.timed; }

private:
    struct TlbEntry {
        Addr vbase = 0;
        Addr pbase = 0;
        std::uint32_t page_shift = 0;
        std::uint64_t stamp = 0;
    };

    const TlbEntry* lookup(Addr vaddr);
    void insert(Addr vaddr, const Translation& t);
    void pump();
    void walk_step(Addr vaddr, Addr table, int level, const Callback& cb);
    void finish_walk(const Callback& cb, Result r);

    Kernel& kernel_;
    const ClockDomain& clk_;
    const AddressSpace& space_;
    MmuParams params_;
    WalkReader read_qword_;

    std::vector<TlbEntry> tlb_;
    std::uint64_t stamp_ = 0;
    bool walking_ = false;
    std::deque<std::pair<Addr, Callback>> queue_;

    std::uint64_t* hits_;
    std::uint64_t* misses_;
    std::uint64_t* walk_reads_;
    std::uint64_t* faults_;
};

}  // namespace tilesim
