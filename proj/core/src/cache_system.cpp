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

#include "tilesim/cache_system.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tilesim {

CacheSystem::CacheSystem(Kernel& kernel, StatRegistry& stats, const ClockDomain& core_clk,
                         const CacheSystemConfig& cfg)
    : kernel_(kernel),
      cfg_(cfg),
      memory_(cfg.mem.capacity_bytes),
      shadow_(cfg.mem.capacity_bytes) {
    const MeshDescription& mesh = cfg_.mesh;
    noc_ = std::make_unique<Noc>(kernel, mesh, core_clk, cfg_.noc, stats);

    const auto n_cores = static_cast<std::uint32_t>(mesh.core_tiles().size());
    const bool with_engine = cfg_.engine_agent && mesh.engine_tile().has_value();
    const auto n_slices = static_cast<std::uint32_t>(mesh.slice_tiles().size());

    // Dense id plan: cores, engine, home slices, memory tiles.
    AgentId next = 0;
    std::vector<AgentId> core_ids;
    for (std::uint32_t i = 0; i < n_cores; ++i) core_ids.push_back(next++);
    const AgentId engine_id = with_engine ? next++ : kInvalidAgent;
    std::vector<AgentId> home_ids;
    for (std::uint32_t i = 0; i < n_slices; ++i) home_ids.push_back(next++);
    std::vector<AgentId> mem_ids;
    for (std::size_t i = 0; i < mesh.mem_tiles().size(); ++i) mem_ids.push_back(next++);

    mem_ = std::make_unique<MemController>(kernel, *noc_, memory_, cfg_.mem, mem_ids, stats);
    for (std::size_t i = 0; i < mem_ids.size(); ++i)
        noc_->attach(mem_ids[i], mesh.mem_tiles()[i], [this](const Msg& m) { mem_->handle(m); });

    std::vector<AgentId> peers = core_ids;
    if (with_engine) peers.push_back(engine_id);

    homes_.reserve(n_slices);
    for (std::uint32_t i = 0; i < n_slices; ++i) {
        auto* ctrl = mem_.get();
        homes_.push_back(std::make_unique<HomeSlice>(
            kernel, *noc_, stats, home_ids[i], cfg_.l3_slice, core_clk, peers,
            [ctrl](Addr a) { return ctrl->agent_for(a); }));
        auto* h = homes_.back().get();
        noc_->attach(home_ids[i], mesh.slice_tiles()[i], [h](const Msg& m) { h->handle(m); });
    }

    auto home_fn = [this](Addr a) { return home_of(a); };
    CacheAgent::Layout core_layout = cfg_.core_layout;
    core_layout.phys_limit = cfg_.mem.capacity_bytes;
    cores_.reserve(n_cores);
    for (std::uint32_t i = 0; i < n_cores; ++i) {
        cores_.push_back(std::make_unique<CacheAgent>(kernel, *noc_, stats,
                                                      "core" + std::to_string(i), core_ids[i], i,
                                                      core_layout, core_clk, home_fn));
        auto* a = cores_.back().get();
        noc_->attach(core_ids[i], mesh.core_tiles()[i], [a](const Msg& m) { a->handle(m); });
    }
    if (with_engine) {
        CacheAgent::Layout el;
        el.has_l1 = false;
        el.l2 = cfg_.engine_cache;
        el.stride.enabled = false;
        el.phys_limit = cfg_.mem.capacity_bytes;
        engine_ = std::make_unique<CacheAgent>(kernel, *noc_, stats, "engine", engine_id, n_cores,
                                               el, core_clk, home_fn);
        auto* a = engine_.get();
        noc_->attach(engine_id, *mesh.engine_tile(), [a](const Msg& m) { a->handle(m); });
    }

    if (cfg_.checked) {
        for (auto& c : cores_) install_checks(*c);
        if (engine_) install_checks(*engine_);
        kernel_.post_event_hook = [this] { check_invariants(); };
    }
}

void CacheSystem::poke(Addr a, const void* bytes, std::size_t n) {
    memory_.write(a, bytes, n);
    if (cfg_.checked) shadow_.write(a, bytes, n);
}

void CacheSystem::peek(Addr a, void* out, std::size_t n) const {
    auto* dst = static_cast<std::uint8_t*>(out);
    while (n > 0) {
        const Addr base = line_of(a);
        const auto off = static_cast<std::size_t>(a - base);
        const std::size_t take = std::min(n, kLineBytes - off);
        const CacheLine* src = nullptr;
        for (const auto& c : cores_)
            if ((src = c->l2().find(base)) != nullptr) break;
        if (!src && engine_) src = engine_->l2().find(base);
        if (!src) src = homes_[slice_of(base)]->l3().find(base);
        if (src)
            std::memcpy(dst, src->data.data() + off, take);
        else
            memory_.read(a, dst, take);
        dst += take;
        a += take;
        n -= take;
    }
}

bool CacheSystem::all_idle() const {
    for (const auto& c : cores_)
        if (!c->idle()) return false;
    if (engine_ && !engine_->idle()) return false;
    for (const auto& h : homes_)
        if (!h->idle()) return false;
    return true;
}

void CacheSystem::flush_all() {
    for (auto& c : cores_) c->flush_all();
    if (engine_) engine_->flush_all();
}

void CacheSystem::install_checks(CacheAgent& agent) {
    agent.on_complete = [this](const CacheReq& req,
                               const std::array<std::uint8_t, kLineBytes>& line) {
        const Addr base = line_of(req.paddr);
        if (req.kind == CacheReq::Kind::write) {
            for (std::size_t i = 0; i < kLineBytes; ++i)
                if (req.wmask & (1ull << i)) shadow_.write(base + i, &req.wdata[i], 1);
            return;
        }
        std::array<std::uint8_t, kLineBytes> want{};
        shadow_.read(base, want.data(), want.size());
        if (want != line) {
            std::ostringstream os;
            os << "data value mismatch at line 0x" << std::hex << base;
            for (std::size_t i = 0; i < kLineBytes; ++i)
                if (want[i] != line[i])
                    os << " [+0x" << i << " got 0x" << +line[i] << " want 0x" << +want[i] << "]";
            throw std::logic_error(os.str());
        }
    };
}

namespace {

struct LineScan {
    std::uint32_t holders = 0;  // peer-index bits with the line valid in a private cache
    int owners = 0;             // holders in E or M
    bool in_l3 = false;
    std::uint32_t dir_sharers = 0;
    std::optional<std::uint32_t> dir_owner;
    bool busy = false;
};

[[noreturn]] void fail(const char* what, Addr line, const LineScan& s) {
    std::ostringstream os;
    os << what << " at line 0x" << std::hex << line << " (holders=0x" << s.holders
       << " owners=" << std::dec << s.owners << " l3=" << s.in_l3 << " sharers=0x" << std::hex
       << s.dir_sharers << " owner=" << (s.dir_owner ? std::to_string(*s.dir_owner) : "-")
       << " busy=" << s.busy << ")";
    throw std::logic_error(os.str());
}

}  // namespace

void CacheSystem::check_invariants() const {
    std::map<Addr, LineScan> scan;
    auto take_private = [&scan](const CacheAgent& a) {
        a.l2().for_each_valid([&](const CacheLine& l) {
            LineScan& s = scan[l.addr];
            s.holders |= 1u << a.peer_index();
            if (l.state == LineState::E || l.state == LineState::M) ++s.owners;
        });
        // L1 mirrors must stay inside L2.
        auto contained = [&a](const CacheLine& l) {
            if (!a.l2().find(l.addr))
                throw std::logic_error("L1 line missing from L2 at 0x" + std::to_string(l.addr));
        };
        if (a.has_l1()) {
            a.l1d().for_each_valid(contained);
            a.l1i().for_each_valid(contained);
        }
    };
    for (const auto& c : cores_) take_private(*c);
    if (engine_) take_private(*engine_);

    std::map<Addr, HomeSlice::DirView> dir;
    for (const auto& h : homes_) {
        h->l3().for_each_valid([&scan](const CacheLine& l) { scan[l.addr].in_l3 = true; });
        h->snapshot(dir);  // address spaces are disjoint across homes
    }
    for (const auto& [addr, view] : dir) {
        LineScan& s = scan[addr];
        s.dir_sharers = view.sharers;
        s.dir_owner = view.owner;
        s.busy = view.busy;
    }

    for (const auto& [addr, s] : scan) {
        if (s.owners > 1) fail("multiple exclusive holders", addr, s);
        if (s.owners == 1 && std::popcount(s.holders) != 1)
            fail("exclusive line also shared", addr, s);
        if (s.in_l3 && s.holders != 0) fail("L3 copy coexists with private copy", addr, s);
        std::uint32_t known = s.dir_sharers;
        if (s.dir_owner) known |= 1u << *s.dir_owner;
        // Writeback buffers count as holders until PutAck and stay directory
        // tracked, so no extra slack is needed while the line is quiescent.
        if (!s.busy && (s.holders & ~known) != 0)
            fail("directory understates holders", addr, s);
    }
}

}  // namespace tilesim
