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
#include <deque>
#include <functional>
#include <optional>

#include "tilesim/cache_agent.hpp"
#include "tilesim/mmu.hpp"

namespace tilesim {

inline constexpr std::uint64_t kNoDep = ~0ull;

// One unit of work for the abstract core: either a fixed-latency compute or a
// memory access. Addresses and store payloads are precomputed by the stream
// generator; deps carry the timing-relevant producer edges (absolute sequence
// numbers of earlier ops).
struct MicroOp {
    enum class Kind : std::uint8_t { compute, load, store, uc_load, uc_store };
    Kind kind = Kind::compute;
    Addr vaddr = 0;
    std::uint8_t size = 0;
    std::uint32_t latency = 1;  // compute only, in core cycles
    std::uint64_t stream = 0;   // prefetcher stream tag
    std::array<std::uint64_t, 3> dep{kNoDep, kNoDep, kNoDep};
    std::array<std::uint8_t, kLineBytes> data{};  // store payload, bytes [0, size)
    // Invoked at completion with the loaded value (loads and uc-loads; first
    // 8 bytes, little endian). Sources use it to steer generation.
    std::function<void(std::uint64_t)> on_value;

    MicroOp& depends_on(std::uint64_t seq);
};

// Lazily generated per-core op stream. next() may return nullopt while the
// source waits for an on_value callback; finished() marks permanent end.
class OpSource {
public:
    virtual ~OpSource() = default;
    virtual std::optional<MicroOp> next() = 0;
    virtual bool finished() const = 0;
};

// Uncacheable window into the engine, installed per core by the engine
// harness. in_region decides by physical address; store completes via done
// (posted: acceptance by the forwarder), load returns the status payload.
struct UcPort {
    std::function<bool(Addr)> in_region;
    std::function<void(Addr, const std::array<std::uint8_t, kLineBytes>&, std::uint8_t,
                       std::function<void()>)>
        store;
    std::function<void(Addr, std::function<void(std::uint64_t)>)> load;
};

struct CoreParams {
    std::uint32_t issue_width = 4;
    std::uint32_t window = 128;
    std::uint32_t lsq = 48;
    std::uint32_t store_fifo = 16;
    std::uint32_t drain_width = 8;  // max outstanding post-retire store drains
};

// In-order dispatch into a fixed window, dependency-driven issue, in-order
// retirement. Cacheable stores apply post-retire through an in-order FIFO.
// Uncacheable ops issue only once all older uc ops completed and every older
// store has drained; cacheable loads may bypass pending uc ops when they
// conflict with no older pending store.
class CoreModel {
public:
    CoreModel(Kernel& kernel, const ClockDomain& clk, CacheAgent& cache, Mmu& mmu,
              const CoreParams& params, StatRegistry& stats, const std::string& prefix);

    // Swapping in a fresh source re-arms on_finished, so phases can chain.
    void set_source(OpSource* source) {
        source_ = source;
        finished_reported_ = false;
        wake();
    }
    void set_uc_port(UcPort port) { uc_ = std::move(port); }
    void start();

    bool finished() const;
    std::function<void()> on_finished;

    std::uint64_t retired() const { return *retired_; }
    // Sequence number the next dispatched op will get. Sources chained on one
    // core anchor their absolute dep numbering here.
    std::uint64_t dispatched() const { return next_seq_; }
    const ClockDomain& clock() const { return clk_; }

private:
    enum class Status : std::uint8_t { waiting, issued, completed };

    struct Slot {
        MicroOp op;
        std::uint64_t seq = 0;
        Status status = Status::waiting;
        SimTime issue_at = 0;
    };

    struct Drain {
        Addr vaddr = 0;
        std::uint8_t size = 0;
        std::array<std::uint8_t, kLineBytes> data{};
        std::uint64_t seq = 0;
        bool inflight = false;
    };

    struct LoadPlan {
        enum class Action : std::uint8_t { blocked, normal, forward };
        Action action = Action::blocked;
        std::uint64_t value = 0;  // store-forwarded bytes
    };

    void step();
    void wake();
    void dispatch();
    void issue();
    void retire();
    void drain_stores();
    bool deps_ready(const Slot& s) const;
    bool uc_may_issue(const Slot& s) const;
    LoadPlan plan_load(const Slot& s) const;
    void issue_load(Slot& s);
    void issue_uc(Slot& s);
    void complete(std::uint64_t seq, std::uint64_t value, bool deliver);
    Slot* find(std::uint64_t seq);
    const Slot* find(std::uint64_t seq) const;
    SimTime edge_at_or_after(SimTime t) const;
    bool is_mem(MicroOp::Kind k) const { return k != MicroOp::Kind::compute; }
    static bool overlaps(Addr a, std::uint32_t an, Addr b, std::uint32_t bn);
    static bool contains(Addr outer, std::uint32_t on, Addr inner, std::uint32_t in_n);
    void check_finished();

    Kernel& kernel_;
    const ClockDomain& clk_;
    CacheAgent& cache_;
    Mmu& mmu_;
    CoreParams params_;
    OpSource* source_ = nullptr;
    UcPort uc_;

    std::deque<Slot> window_;  // contiguous seq range [front_seq_, front_seq_+size)
    std::optional<MicroOp> staged_;  // popped from the source but blocked on LSQ space
    std::uint64_t front_seq_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint32_t lsq_used_ = 0;
    std::uint64_t uc_pending_ = 0;       // uc ops in window not yet completed
    std::uint64_t stores_in_window_ = 0; // cacheable stores not yet retired

    std::deque<Drain> fifo_;
    std::uint32_t drains_inflight_ = 0;

    bool step_pending_ = false;
    bool progress_ = false;
    bool finished_reported_ = false;

    std::uint64_t* retired_;
    std::uint64_t* loads_;
    std::uint64_t* stores_;
    std::uint64_t* uc_loads_;
    std::uint64_t* uc_stores_;
    std::uint64_t* forwarded_;
    std::uint64_t* active_cycles_;
    Histogram* load_to_use_;
    Histogram* uc_round_trip_;
};

// Walk reader that issues 8-byte page-table reads through a cache agent.
Mmu::WalkReader cache_walk_reader(CacheAgent& agent);

}  // namespace tilesim
