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
#include <optional>
#include <vector>

#include "tilesim/core_model.hpp"

namespace tilesim {

// 64-byte command as delivered by one uncacheable store. Byte 0 is the
// opcode; accelerators read their arguments as little-endian words.
struct OffloadCommand {
    CoreId core = 0;
    std::array<std::uint8_t, kLineBytes> bytes{};

    std::uint8_t opcode() const { return bytes[0]; }
    std::uint64_t arg(std::uint32_t i) const {  // args start at byte 8
        std::uint64_t v = 0;
        for (std::uint32_t b = 0; b < 8; ++b)
            v |= static_cast<std::uint64_t>(bytes[8 + 8 * i + b]) << (8 * b);
        return v;
    }
    void set_arg(std::uint32_t i, std::uint64_t v) {
        for (std::uint32_t b = 0; b < 8; ++b)
            bytes[8 + 8 * i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
};

// Status word reported by the engine per core: low byte is the state code,
// the rest carries a payload (e.g. the faulting vaddr page, a result count).
enum class EngineState : std::uint8_t {
    idle = 0,
    busy = 1,
    done = 2,
    queue_full = 3,
    fault = 4,
};

constexpr std::uint64_t make_status(EngineState s, std::uint64_t payload) {
    return static_cast<std::uint64_t>(s) | (payload << 8);
}
constexpr EngineState status_state(std::uint64_t word) {
    return static_cast<EngineState>(word & 0xFF);
}
constexpr std::uint64_t status_payload(std::uint64_t word) { return word >> 8; }

// Accelerator logic hosted by the engine tile: a cooperative state machine
// stepped on engine-clock edges. step() returns true while more stepping is
// useful; the harness otherwise sleeps until a command or completion arrives.
class Accelerator {
public:
    virtual ~Accelerator() = default;
    virtual bool step() = 0;
    virtual bool idle() const = 0;
};

struct EngineParams {
    bool enabled = true;
    std::uint32_t queue_depth = 8;
    std::uint32_t forward_cycles = 20;   // core cycles each way
    std::uint32_t forwarder_depth = 64;  // pending uc ops per core before backpressure
};

// The engine-tile harness: per-core command queues fed through request
// forwarders, a per-core status channel, the privileged configuration
// channel, and line-wide virtual-address load/store ports into the engine
// cache. Command stores are posted: they complete at forwarder handoff, and
// a doorbell arriving at a full queue holds at the ingress, blocking that
// core's forwarder queue until a slot frees.
class EngineHarness {
public:
    EngineHarness(Kernel& kernel, const ClockDomain& engine_clk, const ClockDomain& core_clk,
                  CacheAgent* cache, Mmu* mmu, const EngineParams& params, StatRegistry& stats);

    bool enabled() const { return params_.enabled && cache_ != nullptr; }

    // Privileged setup for one core's uncacheable page: registers the
    // physical range with that core's forwarder and hands back the core-side
    // port. nullopt when the engine is unavailable (software fallback).
    std::optional<UcPort> driver_setup(CoreId core, Addr uc_page_paddr);

    // Privileged configuration transfer (e.g. a traversal descriptor).
    void set_descriptor(std::vector<std::uint8_t> blob) { descriptor_ = std::move(blob); }
    const std::vector<std::uint8_t>& descriptor() const { return descriptor_; }

    void set_accelerator(Accelerator* accel) { accel_ = accel; }
    const ClockDomain& clock() const { return engine_clk_; }

    // Accelerator-side queue and status access. Queues exist for the cores
    // that ran driver_setup; core_count() is one past the highest of them.
    std::uint32_t core_count() const { return static_cast<std::uint32_t>(queues_.size()); }
    bool queue_empty(CoreId core) const { return queues_[core].empty(); }
    const OffloadCommand& queue_front(CoreId core) const { return queues_[core].front(); }
    void queue_pop(CoreId core);
    std::uint32_t queue_size(CoreId core) const {
        return static_cast<std::uint32_t>(queues_[core].size());
    }
    void set_status(CoreId core, EngineState s, std::uint64_t payload);
    void request_step();

    // Line-granularity coherent access in virtual address space. A failed
    // translation drops the access: on_fault fires with the vaddr and no
    // cache traffic happens beyond the walk itself.
    void mem_read(Addr vaddr, std::function<void(const std::array<std::uint8_t, kLineBytes>&)> on_data,
                  std::function<void(Addr)> on_fault);
    void mem_write(Addr vaddr, const std::array<std::uint8_t, kLineBytes>& data, std::uint64_t mask,
                   std::function<void()> on_done, std::function<void(Addr)> on_fault);

    bool idle() const;

private:
    struct Arrival {
        bool is_store = false;
        std::uint32_t offset = 0;  // within the uc page
        std::array<std::uint8_t, kLineBytes> data{};
        SimTime ready_at = 0;
        std::function<void(std::uint64_t)> respond;  // loads only
    };

    struct Forwarder {
        Addr base = 0;  // registered physical range [base, base+4K)
        bool active = false;
        std::deque<Arrival> items;
        bool process_scheduled = false;
    };

    void handoff_store(CoreId core, Addr paddr, const std::array<std::uint8_t, kLineBytes>& data,
                       std::uint8_t size, std::function<void()> done);
    void handoff_load(CoreId core, Addr paddr, std::function<void(std::uint64_t)> done);
    void schedule_process(CoreId core, SimTime t);
    void process_arrivals(CoreId core);
    std::uint64_t compose_status(CoreId core) const;
    SimTime core_edge(std::uint32_t cycles) const;

    Kernel& kernel_;
    ClockDomain engine_clk_;
    ClockDomain core_clk_;
    CacheAgent* cache_;
    Mmu* mmu_;
    EngineParams params_;
    Accelerator* accel_ = nullptr;

    std::vector<Forwarder> fwd_;
    std::vector<std::deque<OffloadCommand>> queues_;
    std::vector<std::uint64_t> status_;
    std::vector<std::uint8_t> descriptor_;
    bool accel_step_scheduled_ = false;
    std::uint32_t mem_outstanding_ = 0;

    std::uint64_t* commands_;
    std::uint64_t* status_queries_;
    std::uint64_t* held_doorbells_;
    std::uint64_t* mem_reads_;
    std::uint64_t* mem_writes_;
    std::uint64_t* dropped_;
};

}  // namespace tilesim
