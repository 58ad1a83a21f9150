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

#include <memory>
#include <vector>

#include "tilesim/backing_store.hpp"
#include "tilesim/cache_agent.hpp"
#include "tilesim/home_slice.hpp"
#include "tilesim/memctrl.hpp"
#include "tilesim/noc.hpp"

namespace tilesim {

struct CacheSystemConfig {
    MeshDescription mesh = MeshDescription::parse(MeshDescription::default_rows());
    NocParams noc;
    CacheAgent::Layout core_layout;
    CacheGeometry engine_cache{512 << 10, 8, 10, 4, 32};
    bool engine_agent = true;  // instantiate the engine-side cache if the mesh has an engine tile
    CacheGeometry l3_slice{64 << 10, 16, 8, 8, 16};
    MemParams mem;
    // Per-event invariant scanning plus the flat-image data-value check.
    // Orders of magnitude slower; meant for protocol fuzzing.
    bool checked = false;
};

// Builds and owns the coherent memory side of the machine: NoC, private cache
// agents for each core tile, the engine cache agent, every L3 home slice and
// the memory controller over the backing store.
class CacheSystem {
public:
    CacheSystem(Kernel& kernel, StatRegistry& stats, const ClockDomain& core_clk,
                const CacheSystemConfig& cfg);

    std::uint32_t core_count() const { return static_cast<std::uint32_t>(cores_.size()); }
    CacheAgent& core_agent(std::uint32_t core) { return *cores_[core]; }
    CacheAgent* engine_agent() { return engine_ ? engine_.get() : nullptr; }
    Noc& noc() { return *noc_; }
    BackingStore& memory() { return memory_; }
    MemController& mem_ctrl() { return *mem_; }
    const MeshDescription& mesh() const { return cfg_.mesh; }

    std::uint32_t slice_count() const { return static_cast<std::uint32_t>(homes_.size()); }
    std::uint32_t slice_of(Addr a) const { return static_cast<std::uint32_t>((a >> kLineShift) % homes_.size()); }
    AgentId home_of(Addr a) const { return homes_[slice_of(a)]->agent(); }
    HomeSlice& home_slice(std::uint32_t i) { return *homes_[i]; }

    // Writes bytes into simulated memory (and the shadow image in checked
    // mode); used for untimed workload/page-table setup.
    void poke(Addr a, const void* bytes, std::size_t n);

    // Debug read of the coherent value of a physical range: a private cache
    // copy wins over the victim L3, which wins over memory. Touches no
    // simulated state; call only on a quiesced system.
    void peek(Addr a, void* out, std::size_t n) const;

    bool all_idle() const;
    void flush_all();

    // Full-state protocol scan; throws std::logic_error on any violation.
    void check_invariants() const;
    BackingStore& shadow() { return shadow_; }
    bool checked() const { return cfg_.checked; }

private:
    void install_checks(CacheAgent& agent);

    Kernel& kernel_;
    CacheSystemConfig cfg_;
    BackingStore memory_;
    BackingStore shadow_;
    std::unique_ptr<Noc> noc_;
    std::unique_ptr<MemController> mem_;
    std::vector<std::unique_ptr<HomeSlice>> homes_;
    std::vector<std::unique_ptr<CacheAgent>> cores_;
    std::unique_ptr<CacheAgent> engine_;
};

}  // namespace tilesim
