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

#include "tilesim/engine.hpp"

#include <cassert>
#include <stdexcept>

namespace tilesim {

EngineHarness::EngineHarness(Kernel& kernel, const ClockDomain& engine_clk,
                             const ClockDomain& core_clk, CacheAgent* cache, Mmu* mmu,
                             const EngineParams& params, StatRegistry& stats)
    : kernel_(kernel),
      engine_clk_(engine_clk),
      core_clk_(core_clk),
      cache_(cache),
      mmu_(mmu),
      params_(params),
      commands_(stats.counter("engine.commands")),
      status_queries_(stats.counter("engine.status_queries")),
      held_doorbells_(stats.counter("engine.held_doorbells")),
      mem_reads_(stats.counter("engine.mem_reads")),
      mem_writes_(stats.counter("engine.mem_writes")),
      dropped_(stats.counter("engine.dropped_faults")) {
    if (params_.queue_depth == 0 || params_.forwarder_depth == 0)
        throw std::invalid_argument("engine queue depths must be positive");
    if (enabled() && mmu_ == nullptr)
        throw std::invalid_argument("enabled engine needs an mmu");
}

SimTime EngineHarness::core_edge(std::uint32_t cycles) const {
    return kernel_.now() + core_clk_.cycles(cycles);
}

std::optional<UcPort> EngineHarness::driver_setup(CoreId core, Addr uc_page_paddr) {
    if (!enabled()) return std::nullopt;
    if (core >= fwd_.size()) {
        fwd_.resize(core + 1);
        queues_.resize(core + 1);
        status_.resize(core + 1, make_status(EngineState::idle, 0));
    }
    Forwarder& f = fwd_[core];
    if (f.active) throw std::logic_error("core already set up");
    f.base = page_of(uc_page_paddr);
    f.active = true;
    UcPort port;
    port.in_region = [this, core](Addr p) {
        const Forwarder& fw = fwd_[core];
        return fw.active && p >= fw.base && p < fw.base + kPageBytes;
    };
    port.store = [this, core](Addr p, const std::array<std::uint8_t, kLineBytes>& d,
                              std::uint8_t sz, std::function<void()> done) {
        handoff_store(core, p, d, sz, std::move(done));
    };
    port.load = [this, core](Addr p, std::function<void(std::uint64_t)> done) {
        handoff_load(core, p, std::move(done));
    };
    return port;
}

void EngineHarness::handoff_store(CoreId core, Addr paddr,
                                  const std::array<std::uint8_t, kLineBytes>& data,
                                  std::uint8_t size, std::function<void()> done) {
    Forwarder& f = fwd_[core];
    if (f.items.size() >= params_.forwarder_depth) {
        kernel_.schedule_at(core_clk_.next_edge(kernel_.now(), 1),
                            [this, core, paddr, data, size, done = std::move(done)]() mutable {
                                handoff_store(core, paddr, data, size, std::move(done));
                            });
        return;
    }
    Arrival a;
    a.is_store = true;
    a.offset = static_cast<std::uint32_t>(paddr - f.base);
    a.data = data;
    (void)size;  // commands are full-line stores; shorter ones arrive zero padded
    a.ready_at = core_edge(params_.forward_cycles);
    f.items.push_back(std::move(a));
    schedule_process(core, f.items.back().ready_at);
    // Posted: the store completes at handoff, not at engine acceptance.
    kernel_.schedule_at(core_clk_.next_edge(kernel_.now(), 1), std::move(done));
}

void EngineHarness::handoff_load(CoreId core, Addr paddr,
                                 std::function<void(std::uint64_t)> done) {
    Forwarder& f = fwd_[core];
    if (f.items.size() >= params_.forwarder_depth) {
        kernel_.schedule_at(core_clk_.next_edge(kernel_.now(), 1),
                            [this, core, paddr, done = std::move(done)]() mutable {
                                handoff_load(core, paddr, std::move(done));
                            });
        return;
    }
    Arrival a;
    a.offset = static_cast<std::uint32_t>(paddr - f.base);
    a.ready_at = core_edge(params_.forward_cycles);
    a.respond = std::move(done);
    f.items.push_back(std::move(a));
    schedule_process(core, f.items.back().ready_at);
}

void EngineHarness::schedule_process(CoreId core, SimTime t) {
    Forwarder& f = fwd_[core];
    if (f.process_scheduled) return;
    f.process_scheduled = true;
    kernel_.schedule_at(t, [this, core] { process_arrivals(core); });
}

void EngineHarness::process_arrivals(CoreId core) {
    Forwarder& f = fwd_[core];
    f.process_scheduled = false;
    const SimTime now = kernel_.now();
    while (!f.items.empty()) {
        Arrival& a = f.items.front();
        if (a.ready_at > now) {
            schedule_process(core, a.ready_at);
            return;
        }
        if (a.is_store) {
            if (a.offset == 0) {  // doorbell
                if (queues_[core].size() >= params_.queue_depth) {
                    // Hold at the ingress; the queue drains as the
                    // accelerator completes work.
                    ++*held_doorbells_;
                    schedule_process(core, engine_clk_.next_edge(now, 1));
                    return;
                }
                OffloadCommand cmd;
                cmd.core = core;
                cmd.bytes = a.data;
                queues_[core].push_back(cmd);
                ++*commands_;
                const EngineState s = status_state(status_[core]);
                if (s == EngineState::idle || s == EngineState::done)
                    status_[core] = make_status(EngineState::busy, 0);
                request_step();
            }
            // Stores at other offsets are absorbed without effect.
        } else {
            ++*status_queries_;
            const std::uint64_t word = compose_status(core);
            kernel_.schedule_at(core_edge(params_.forward_cycles),
                                [respond = std::move(a.respond), word] { respond(word); });
        }
        f.items.pop_front();
    }
}

std::uint64_t EngineHarness::compose_status(CoreId core) const {
    const std::uint64_t w = status_[core];
    const EngineState s = status_state(w);
    if (queues_[core].size() >= params_.queue_depth && s != EngineState::done &&
        s != EngineState::fault)
        return make_status(EngineState::queue_full, 0);
    return w;
}

void EngineHarness::queue_pop(CoreId core) {
    assert(!queues_[core].empty());
    queues_[core].pop_front();
    // A held doorbell may now fit; its retry chain is already scheduled.
}

void EngineHarness::set_status(CoreId core, EngineState s, std::uint64_t payload) {
    assert(core < status_.size());
    status_[core] = make_status(s, payload);
}

void EngineHarness::request_step() {
    if (!accel_ || accel_step_scheduled_) return;
    accel_step_scheduled_ = true;
    kernel_.schedule_at(engine_clk_.next_edge(kernel_.now(), 1), [this] {
        accel_step_scheduled_ = false;
        if (accel_->step()) request_step();
    });
}

void EngineHarness::mem_read(Addr vaddr,
                             std::function<void(const std::array<std::uint8_t, kLineBytes>&)>
                                 on_data,
                             std::function<void(Addr)> on_fault) {
    assert(enabled());
    ++mem_outstanding_;
    mmu_->translate(vaddr, [this, vaddr, on_data = std::move(on_data),
                            on_fault = std::move(on_fault)](Mmu::Result r) {
        if (r.fault) {
            ++*dropped_;
            --mem_outstanding_;
            on_fault(vaddr);
            request_step();
            return;
        }
        ++*mem_reads_;
        CacheReq req;
        req.kind = CacheReq::Kind::read;
        req.paddr = line_of(r.paddr);
        req.size = kLineBytes;
        req.done = [this, on_data = std::move(on_data)](const CacheResp& resp) {
            --mem_outstanding_;
            on_data(resp.line);
            request_step();
        };
        cache_->access(std::move(req));
    });
}

void EngineHarness::mem_write(Addr vaddr, const std::array<std::uint8_t, kLineBytes>& data,
                              std::uint64_t mask, std::function<void()> on_done,
                              std::function<void(Addr)> on_fault) {
    assert(enabled());
    ++mem_outstanding_;
    mmu_->translate(vaddr, [this, vaddr, data, mask, on_done = std::move(on_done),
                            on_fault = std::move(on_fault)](Mmu::Result r) {
        if (r.fault) {
            ++*dropped_;
            --mem_outstanding_;
            on_fault(vaddr);
            request_step();
            return;
        }
        ++*mem_writes_;
        CacheReq req;
        req.kind = CacheReq::Kind::write;
        req.paddr = line_of(r.paddr);
        req.size = kLineBytes;
        req.wdata = data;
        req.wmask = mask;
        req.done = [this, on_done = std::move(on_done)](const CacheResp&) {
            --mem_outstanding_;
            on_done();
            request_step();
        };
        cache_->access(std::move(req));
    });
}

bool EngineHarness::idle() const {
    if (mem_outstanding_ != 0) return false;
    if (accel_ && !accel_->idle()) return false;
    for (const auto& q : queues_)
        if (!q.empty()) return false;
    for (const auto& f : fwd_)
        if (!f.items.empty()) return false;
    return true;
}

}  // namespace tilesim
