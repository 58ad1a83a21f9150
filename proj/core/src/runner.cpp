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

#include "tilesim/runner.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "tilesim/bfs.hpp"
#include "tilesim/cache_system.hpp"
#include "tilesim/dig.hpp"
#include "tilesim/qsort_stream.hpp"
#include "tilesim/rng.hpp"

namespace tilesim {
namespace {

// Fixed physical carve-up: page tables in [1 MiB, 9 MiB), workload frames
// from 16 MiB to the end of installed memory. Low memory stays unused so a
// zero paddr can never alias workload data.
constexpr Addr kTableBase = 1ull << 20;
constexpr std::uint64_t kTableBytes = 8ull << 20;
constexpr Addr kFrameBase = 16ull << 20;

// Ten simulated seconds; any desk-scale workload finishes orders of
// magnitude earlier, so hitting this means a lost wakeup somewhere.
constexpr SimTime kSimLimit = 10'000'000'000'000ull;

PagePolicy policy_of(const RunConfig& cfg) {
    if (cfg.paging == "small") return PagePolicy::small_only;
    if (cfg.paging == "huge") return PagePolicy::huge_only;
    return PagePolicy::thp;
}

struct Machine {
    Kernel kernel;
    StatRegistry stats;
    ClockDomain core_clk;
    ClockDomain engine_clk;
    std::unique_ptr<CacheSystem> cs;
    AddressSpace::Writer writer;
    std::unique_ptr<AddressSpace> as;
    std::vector<std::unique_ptr<Mmu>> core_mmus;
    std::vector<std::unique_ptr<CoreModel>> cores;
    std::unique_ptr<Mmu> engine_mmu;
    std::unique_ptr<EngineHarness> harness;
    std::unique_ptr<DataAwarePrefetcher> dapf;
    std::unique_ptr<QuicksortEngine> qsort;

    explicit Machine(const RunConfig& cfg)
        : core_clk(static_cast<std::uint64_t>(cfg.core.clock_mhz) * 1'000'000),
          engine_clk(static_cast<std::uint64_t>(cfg.engine.clock_mhz) * 1'000'000) {
        CacheSystemConfig csc;
        csc.mesh = MeshDescription::parse(split_mesh_rows(cfg.mesh_rows));
        csc.noc = cfg.noc;
        csc.core_layout.has_l1 = true;
        csc.core_layout.l1i = cfg.core.l1i;
        csc.core_layout.l1d = cfg.core.l1d;
        csc.core_layout.l2 = cfg.core.l2;
        csc.core_layout.stride = cfg.core.stride;
        csc.core_layout.phys_limit = cfg.mem.capacity_bytes;
        csc.engine_cache = cfg.engine.cache;
        csc.engine_agent = cfg.engine.present;
        csc.l3_slice = cfg.l3_slice;
        csc.mem = cfg.mem;
        csc.checked = cfg.checked;
        cs = std::make_unique<CacheSystem>(kernel, stats, core_clk, csc);

        writer = [this](Addr a, const void* p, std::size_t n) { cs->poke(a, p, n); };
        as = std::make_unique<AddressSpace>(cs->memory(), kTableBase, kTableBytes, kFrameBase,
                                            cfg.mem.capacity_bytes - kFrameBase, writer);

        for (std::uint32_t i = 0; i < cs->core_count(); ++i) {
            std::string prefix = "cpu" + std::to_string(i);
            core_mmus.push_back(std::make_unique<Mmu>(
                kernel, core_clk, *as, MmuParams{cfg.core.tlb_entries, true},
                cache_walk_reader(cs->core_agent(i)), stats, prefix + ".mmu"));
            cores.push_back(std::make_unique<CoreModel>(kernel, core_clk, cs->core_agent(i),
                                                        *core_mmus[i], cfg.core.params, stats,
                                                        prefix));
        }

        if (cfg.engine.present && cs->engine_agent()) {
            engine_mmu = std::make_unique<Mmu>(
                kernel, engine_clk, *as,
                MmuParams{cfg.engine.tlb_entries, cfg.engine.translation == "timed"},
                cache_walk_reader(*cs->engine_agent()), stats, "engine.mmu");
            EngineParams ep = cfg.engine.params;
            ep.enabled = true;
            harness = std::make_unique<EngineHarness>(kernel, engine_clk, core_clk,
                                                      cs->engine_agent(), engine_mmu.get(), ep,
                                                      stats);
            if (cfg.engine.kind == "dapf") {
                DapfParams dp;
                dp.distance = cfg.workload.bfs.k;
                dp.reads_per_cycle = cfg.engine.dapf_reads_per_cycle;
                dapf = std::make_unique<DataAwarePrefetcher>(*harness, dp, stats);
                harness->set_accelerator(dapf.get());
            } else if (cfg.engine.kind == "qsort") {
                qsort = std::make_unique<QuicksortEngine>(*harness, cfg.engine.qsort, stats);
                harness->set_accelerator(qsort.get());
            }
        }
    }

    // Runs the scheduled work to completion; `done` must have been set by an
    // on_finished chain, otherwise the run stalled and the state is dumped.
    void drive(const bool& done, const char* what) {
        StopReason r = kernel.run_until(kSimLimit);
        if (!done || r == StopReason::limit) {
            std::ostringstream msg;
            msg << what << ": simulation stalled at tick " << kernel.now() << " (stop reason "
                << static_cast<int>(r) << ", " << kernel.events_processed() << " events)";
            throw std::runtime_error(msg.str());
        }
    }
};

// Copies every mapped region at or above the workload array window into one
// flat buffer so post-run oracles can read the final memory image.
void snapshot_arrays(const Machine& m, RunResult& out) {
    Addr lo = ~Addr{0}, hi = 0;
    for (const auto& r : m.as->regions()) {
        if (r.vbase < kArrayVBase) continue;
        lo = std::min(lo, r.vbase);
        hi = std::max(hi, r.vbase + r.length);
    }
    if (lo >= hi) return;
    out.image_base = lo;
    out.image.assign(hi - lo, 0);
    // Read through the cache hierarchy: the run just finished and dirty lines
    // may still sit in L2 or the victim L3.
    AddressSpace::Reader coherent = [&m](Addr pa, void* dst, std::size_t n) {
        m.cs->peek(pa, dst, n);
    };
    for (const auto& r : m.as->regions()) {
        if (r.vbase < kArrayVBase) continue;
        peek_virtual(*m.as, coherent, r.vbase, out.image.data() + (r.vbase - lo), r.length);
    }
}

std::uint64_t mapped_footprint(const Machine& m) {
    std::uint64_t total = 0;
    for (const auto& r : m.as->regions())
        if (r.vbase >= kArrayVBase) total += r.length;
    return total;
}

struct UcSetup {
    UcPage page;
};

UcSetup set_up_offload(Machine& m, const RunConfig& cfg) {
    UcSetup u;
    u.page = map_uc_page(*m.as, cfg.measured_core);
    auto port = m.harness->driver_setup(cfg.measured_core, u.page.paddr);
    if (!port) throw std::logic_error("engine harness refused driver setup");
    m.cores[cfg.measured_core]->set_uc_port(std::move(*port));
    return u;
}

RunResult run_bfs(const RunConfig& cfg, Machine& m, const std::optional<BaselineRef>& baseline,
                  const RunHooks* hooks) {
    const auto& wl = cfg.workload.bfs;
    CsrGraph g = build_graph(wl.graph);
    g.validate();
    if (wl.source >= g.n) throw ConfigError("workload.bfs.source: node id out of range");
    if (wl.source2 >= g.n) throw ConfigError("workload.bfs.source2: node id out of range");

    BfsLayout lay = lay_out_bfs(*m.as, m.writer, g, policy_of(cfg));

    // Seed the warm-up pass the way the host program would, before timing
    // starts: root queued, marked visited, parent pointing at itself.
    {
        std::uint64_t v = wl.source;
        poke_virtual(*m.as, m.writer, lay.queue, &v, 8);
        std::uint8_t one = 1;
        poke_virtual(*m.as, m.writer, lay.visited + wl.source, &one, 1);
        poke_virtual(*m.as, m.writer, lay.parent + wl.source * 8, &v, 8);
    }

    Addr doorbell = 0;
    if (wl.hints) {
        UcSetup uc = set_up_offload(m, cfg);
        doorbell = uc.page.vaddr;
        m.harness->set_descriptor(DigDescriptor::for_bfs(lay).serialize());
        if (hooks && m.dapf) {
            m.dapf->on_hint = hooks->on_hint;
            m.dapf->on_prefetch = hooks->on_prefetch;
        }
    }

    CoreModel& core = *m.cores[cfg.measured_core];

    std::unique_ptr<OpSource> warm, reinit, measured;
    int phase = 0;
    bool done = false;
    SimTime t0 = 0, t_end = 0;

    core.on_finished = [&] {
        if (phase == 0) {
            phase = 1;
            reinit = std::make_unique<ArrayInitSource>(lay, wl.source2);
            core.set_source(reinit.get());
        } else if (phase == 1) {
            phase = 2;
            m.stats.reset();
            t0 = m.kernel.now();
            BfsStreamConfig mc;
            mc.source = wl.source2;
            mc.hints = wl.hints;
            mc.hint_distance = wl.k;
            mc.doorbell = doorbell;
            mc.base_seq = core.dispatched();
            measured = std::make_unique<BfsSource>(g, lay, mc, m.stats);
            core.set_source(measured.get());
        } else {
            t_end = m.kernel.now();
            done = true;
        }
    };

    BfsStreamConfig wc;
    wc.source = wl.source;
    wc.hints = false;  // the warm-up pass only primes the caches
    wc.base_seq = core.dispatched();
    warm = std::make_unique<BfsSource>(g, lay, wc, m.stats);
    core.set_source(warm.get());
    core.start();
    m.drive(done, "bfs");

    const std::uint64_t cycles = m.core_clk.cycle_of(t_end) - m.core_clk.cycle_of(t0);

    std::vector<std::uint64_t> expect = bfs_reference(g, wl.source2);
    std::vector<std::uint64_t> got(g.n);
    AddressSpace::Reader coherent = [&m](Addr pa, void* dst, std::size_t n) {
        m.cs->peek(pa, dst, n);
    };
    if (g.n) peek_virtual(*m.as, coherent, lay.parent, got.data(), g.n * 8);
    for (std::uint64_t v = 0; v < g.n; ++v) {
        if (got[v] == expect[v]) continue;
        std::ostringstream msg;
        msg << "bfs: parent mismatch at node " << v << ": simulated " << got[v]
            << ", reference " << expect[v] << " (source " << wl.source2 << ")";
        throw std::runtime_error(msg.str());
    }

    nlohmann::json info;
    info["kind"] = "bfs";
    info["graph"] = {{"nodes", g.n},
                     {"half_edges", g.half_edges()},
                     {"avg_degree", g.avg_degree()},
                     {"frac_degree_over_128", g.degree_skew(128)}};
    info["source"] = wl.source;
    info["source2"] = wl.source2;
    info["hints"] = wl.hints;
    info["k"] = wl.k;
    info["footprint_bytes"] = mapped_footprint(m);

    RunResult out;
    out.bfs = lay;
    out.total_cycles = cycles;
    snapshot_arrays(m, out);
    out.report = make_report(cfg, info, cycles, baseline, m.stats);
    return out;
}

RunResult run_qsort(const RunConfig& cfg, Machine& m, const std::optional<BaselineRef>& baseline) {
    const auto& wl = cfg.workload.qsort;

    Rng rng(wl.seed);
    std::vector<std::uint32_t> input(wl.n);
    for (auto& v : input) v = static_cast<std::uint32_t>(rng.next_u64());

    QsortLayout lay = lay_out_qsort(*m.as, wl.n, policy_of(cfg));
    if (wl.n) poke_virtual(*m.as, m.writer, lay.base, input.data(), wl.n * 4);

    CoreModel& core = *m.cores[cfg.measured_core];
    std::unique_ptr<OpSource> src;
    OffloadQsortSource* offload = nullptr;

    if (wl.mode == "offload") {
        UcSetup uc = set_up_offload(m, cfg);
        auto s = std::make_unique<OffloadQsortSource>(uc.page.vaddr, uc.page.vaddr + kLineBytes,
                                                      lay.base, wl.n);
        offload = s.get();
        src = std::move(s);
    } else {
        src = std::make_unique<SoftwareQsortSource>(lay, input, cfg.engine.qsort.cutoff,
                                                    core.dispatched(), m.stats);
    }

    bool done = false;
    SimTime t_end = 0;
    core.on_finished = [&] {
        t_end = m.kernel.now();
        done = true;
    };

    m.stats.reset();
    const SimTime t0 = m.kernel.now();
    core.set_source(src.get());
    core.start();
    m.drive(done, "qsort");

    if (offload && offload->faulted())
        throw std::runtime_error("qsort: engine reported a translation fault");

    const std::uint64_t cycles = m.core_clk.cycle_of(t_end) - m.core_clk.cycle_of(t0);

    std::vector<std::uint32_t> expect = input;
    std::sort(expect.begin(), expect.end());
    std::vector<std::uint32_t> got(wl.n);
    AddressSpace::Reader coherent = [&m](Addr pa, void* dst, std::size_t n) {
        m.cs->peek(pa, dst, n);
    };
    if (wl.n) peek_virtual(*m.as, coherent, lay.base, got.data(), wl.n * 4);
    for (std::uint64_t i = 0; i < wl.n; ++i) {
        if (got[i] == expect[i]) continue;
        std::ostringstream msg;
        msg << "qsort: element " << i << " is " << got[i] << ", expected " << expect[i]
            << " (n=" << wl.n << ", mode " << wl.mode << ")";
        throw std::runtime_error(msg.str());
    }

    nlohmann::json info;
    info["kind"] = "qsort";
    info["n"] = wl.n;
    info["mode"] = wl.mode;
    info["footprint_bytes"] = mapped_footprint(m);

    RunResult out;
    out.qsort = lay;
    out.total_cycles = cycles;
    snapshot_arrays(m, out);
    out.report = make_report(cfg, info, cycles, baseline, m.stats);
    return out;
}

}  // namespace

std::uint64_t RunResult::u64_at(Addr vaddr) const {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | image.at(vaddr - image_base + i);
    return v;
}

std::uint8_t RunResult::u8_at(Addr vaddr) const { return image.at(vaddr - image_base); }

RunResult run_simulation(const RunConfig& cfg, const std::optional<BaselineRef>& baseline,
                         const RunHooks* hooks) {
    validate_config(cfg);
    Machine m(cfg);
    RunResult out = cfg.workload.kind == "bfs" ? run_bfs(cfg, m, baseline, hooks)
                                               : run_qsort(cfg, m, baseline);
    validate_report(out.report);
    return out;
}

}  // namespace tilesim
