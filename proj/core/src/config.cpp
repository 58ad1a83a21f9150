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

#include "tilesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tilesim/mesh.hpp"

namespace tilesim {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
    return out;
}

double parse_f64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::string fmt_f64(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

struct Binding {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Bindings = std::vector<Binding>;

template <class Get>
void add_u64(Bindings& b, std::string key, Get ref) {
    b.push_back({key,
                 [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_u64(key, v); },
                 [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }});
}

template <class Get>
void add_u32(Bindings& b, std::string key, Get ref) {
    b.push_back({key,
                 [key, ref](RunConfig& c, const std::string& v) {
                     std::uint64_t x = parse_u64(key, v);
                     if (x > 0xFFFF'FFFFull)
                         throw ConfigError("key '" + key + "': value out of range");
                     ref(c) = static_cast<std::uint32_t>(x);
                 },
                 [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }});
}

// Capacities live in bytes internally; the keys speak KiB (or MiB) so sweep
// value lists stay readable.
template <class Get>
void add_scaled(Bindings& b, std::string key, std::uint64_t unit, Get ref) {
    b.push_back({key,
                 [key, unit, ref](RunConfig& c, const std::string& v) {
                     ref(c) = parse_u64(key, v) * unit;
                 },
                 [unit, ref](const RunConfig& c) {
                     return std::to_string(ref(const_cast<RunConfig&>(c)) / unit);
                 }});
}

template <class Get>
void add_f64(Bindings& b, std::string key, Get ref) {
    b.push_back({key,
                 [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_f64(key, v); },
                 [ref](const RunConfig& c) { return fmt_f64(ref(const_cast<RunConfig&>(c))); }});
}

template <class Get>
void add_bool(Bindings& b, std::string key, Get ref) {
    b.push_back({key,
                 [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); },
                 [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)) ? "true" : "false"; }});
}

template <class Get>
void add_str(Bindings& b, std::string key, Get ref, std::vector<std::string> allowed = {}) {
    b.push_back({key,
                 [key, ref, allowed](RunConfig& c, const std::string& v) {
                     if (!allowed.empty() &&
                         std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                         std::string msg = "key '" + key + "': expected one of";
                         for (const auto& a : allowed) msg += " '" + a + "'";
                         msg += ", got '" + v + "'";
                         throw ConfigError(msg);
                     }
                     ref(c) = v;
                 },
                 [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }});
}

void add_geometry(Bindings& b, const std::string& prefix,
                  std::function<CacheGeometry&(RunConfig&)> geo) {
    add_scaled(b, prefix + ".kib", 1024,
               [geo](RunConfig& c) -> std::uint64_t& { return geo(c).capacity_bytes; });
    add_u32(b, prefix + ".ways", [geo](RunConfig& c) -> std::uint32_t& { return geo(c).ways; });
    add_u32(b, prefix + ".hit", [geo](RunConfig& c) -> std::uint32_t& { return geo(c).hit_latency; });
    add_u32(b, prefix + ".tag", [geo](RunConfig& c) -> std::uint32_t& { return geo(c).tag_latency; });
    add_u32(b, prefix + ".mshrs", [geo](RunConfig& c) -> std::uint32_t& { return geo(c).mshrs; });
}

const Bindings& bindings() {
    static const Bindings table = [] {
        Bindings b;
        add_str(b, "label", [](RunConfig& c) -> std::string& { return c.label; });
        add_u64(b, "seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; });
        add_str(b, "baseline", [](RunConfig& c) -> std::string& { return c.baseline; });
        add_u32(b, "measured_core", [](RunConfig& c) -> std::uint32_t& { return c.measured_core; });
        add_bool(b, "checked", [](RunConfig& c) -> bool& { return c.checked; });
        add_str(b, "mesh.rows", [](RunConfig& c) -> std::string& { return c.mesh_rows; });

        add_u32(b, "noc.router_cycles",
                [](RunConfig& c) -> std::uint32_t& { return c.noc.router_latency_cycles; });
        add_u32(b, "noc.link_cycles",
                [](RunConfig& c) -> std::uint32_t& { return c.noc.link_latency_cycles; });

        add_u32(b, "mem.channels", [](RunConfig& c) -> std::uint32_t& { return c.mem.channels; });
        add_f64(b, "mem.channel_gib",
                [](RunConfig& c) -> double& { return c.mem.channel_bandwidth_gib; });
        add_f64(b, "mem.latency_ns", [](RunConfig& c) -> double& { return c.mem.fixed_latency_ns; });
        add_scaled(b, "mem.capacity_mib", 1ull << 20,
                   [](RunConfig& c) -> std::uint64_t& { return c.mem.capacity_bytes; });

        add_u32(b, "core.clock_mhz", [](RunConfig& c) -> std::uint32_t& { return c.core.clock_mhz; });
        add_u32(b, "core.issue_width",
                [](RunConfig& c) -> std::uint32_t& { return c.core.params.issue_width; });
        add_u32(b, "core.window", [](RunConfig& c) -> std::uint32_t& { return c.core.params.window; });
        add_u32(b, "core.lsq", [](RunConfig& c) -> std::uint32_t& { return c.core.params.lsq; });
        add_u32(b, "core.store_fifo",
                [](RunConfig& c) -> std::uint32_t& { return c.core.params.store_fifo; });
        add_u32(b, "core.drain_width",
                [](RunConfig& c) -> std::uint32_t& { return c.core.params.drain_width; });
        add_u32(b, "core.tlb_entries",
                [](RunConfig& c) -> std::uint32_t& { return c.core.tlb_entries; });
        add_geometry(b, "core.l1i", [](RunConfig& c) -> CacheGeometry& { return c.core.l1i; });
        add_geometry(b, "core.l1d", [](RunConfig& c) -> CacheGeometry& { return c.core.l1d; });
        add_geometry(b, "core.l2", [](RunConfig& c) -> CacheGeometry& { return c.core.l2; });
        add_bool(b, "core.stride.enabled",
                 [](RunConfig& c) -> bool& { return c.core.stride.enabled; });
        add_u32(b, "core.stride.degree",
                [](RunConfig& c) -> std::uint32_t& { return c.core.stride.degree; });
        add_u32(b, "core.stride.table",
                [](RunConfig& c) -> std::uint32_t& { return c.core.stride.table_entries; });

        add_geometry(b, "l3", [](RunConfig& c) -> CacheGeometry& { return c.l3_slice; });

        add_bool(b, "engine.present", [](RunConfig& c) -> bool& { return c.engine.present; });
        add_str(b, "engine.kind", [](RunConfig& c) -> std::string& { return c.engine.kind; },
                {"none", "dapf", "qsort"});
        add_u32(b, "engine.clock_mhz",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.clock_mhz; });
        add_u32(b, "engine.tlb_entries",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.tlb_entries; });
        add_str(b, "engine.translation",
                [](RunConfig& c) -> std::string& { return c.engine.translation; },
                {"timed", "functional"});
        add_u32(b, "engine.queue_depth",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.params.queue_depth; });
        add_u32(b, "engine.forward_cycles",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.params.forward_cycles; });
        add_u32(b, "engine.forwarder_depth",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.params.forwarder_depth; });
        add_geometry(b, "engine.cache", [](RunConfig& c) -> CacheGeometry& { return c.engine.cache; });
        add_u32(b, "engine.dapf.reads_per_cycle",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.dapf_reads_per_cycle; });
        add_u32(b, "engine.qsort.compares_per_cycle",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.qsort.compares_per_cycle; });
        add_u32(b, "engine.qsort.cutoff",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.qsort.cutoff; });
        add_u32(b, "engine.qsort.store_buffer",
                [](RunConfig& c) -> std::uint32_t& { return c.engine.qsort.store_buffer_entries; });

        add_str(b, "paging.policy", [](RunConfig& c) -> std::string& { return c.paging; },
                {"thp", "small", "huge"});

        add_str(b, "workload.kind", [](RunConfig& c) -> std::string& { return c.workload.kind; },
                {"bfs", "qsort"});
        b.push_back({"workload.bfs.graph.kind",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "kronecker")
                             c.workload.bfs.graph.kind = GraphSpec::Kind::kronecker;
                         else if (v == "file")
                             c.workload.bfs.graph.kind = GraphSpec::Kind::file;
                         else
                             throw ConfigError(
                                 "key 'workload.bfs.graph.kind': expected 'kronecker' or 'file', "
                                 "got '" +
                                 v + "'");
                     },
                     [](const RunConfig& c) -> std::string {
                         return c.workload.bfs.graph.kind == GraphSpec::Kind::kronecker ? "kronecker"
                                                                                        : "file";
                     }});
        add_u32(b, "workload.bfs.graph.scale",
                [](RunConfig& c) -> std::uint32_t& { return c.workload.bfs.graph.scale; });
        add_f64(b, "workload.bfs.graph.degree",
                [](RunConfig& c) -> double& { return c.workload.bfs.graph.degree; });
        add_u64(b, "workload.bfs.graph.seed",
                [](RunConfig& c) -> std::uint64_t& { return c.workload.bfs.graph.seed; });
        add_str(b, "workload.bfs.graph.file",
                [](RunConfig& c) -> std::string& { return c.workload.bfs.graph.path; });
        add_u64(b, "workload.bfs.source",
                [](RunConfig& c) -> std::uint64_t& { return c.workload.bfs.source; });
        add_u64(b, "workload.bfs.source2",
                [](RunConfig& c) -> std::uint64_t& { return c.workload.bfs.source2; });
        add_bool(b, "workload.bfs.hints",
                 [](RunConfig& c) -> bool& { return c.workload.bfs.hints; });
        add_u32(b, "workload.bfs.k", [](RunConfig& c) -> std::uint32_t& { return c.workload.bfs.k; });
        add_u64(b, "workload.qsort.n",
                [](RunConfig& c) -> std::uint64_t& { return c.workload.qsort.n; });
        add_u64(b, "workload.qsort.seed",
                [](RunConfig& c) -> std::uint64_t& { return c.workload.qsort.seed; });
        add_str(b, "workload.qsort.mode",
                [](RunConfig& c) -> std::string& { return c.workload.qsort.mode; },
                {"software", "offload"});

        std::sort(b.begin(), b.end(), [](const Binding& x, const Binding& y) { return x.key < y.key; });
        return b;
    }();
    return table;
}

const std::map<std::string, const Binding*>& binding_map() {
    static const std::map<std::string, const Binding*> m = [] {
        std::map<std::string, const Binding*> out;
        for (const auto& b : bindings()) out[b.key] = &b;
        return out;
    }();
    return m;
}

void check_geometry(const std::string& prefix, const CacheGeometry& g) {
    if (g.ways == 0) throw ConfigError(prefix + ".ways: must be at least 1");
    std::uint64_t line_span = std::uint64_t{g.ways} * kLineBytes;
    if (g.capacity_bytes == 0 || g.capacity_bytes % line_span != 0)
        throw ConfigError(prefix + ".kib: capacity must be a nonzero multiple of ways * 64 bytes");
    std::uint64_t sets = g.capacity_bytes / line_span;
    if ((sets & (sets - 1)) != 0)
        throw ConfigError(prefix + ".kib: set count " + std::to_string(sets) +
                          " is not a power of two");
    if (g.hit_latency == 0) throw ConfigError(prefix + ".hit: must be at least 1");
    if (g.mshrs == 0) throw ConfigError(prefix + ".mshrs: must be at least 1");
}

void check_clock(const std::string& key, std::uint32_t mhz) {
    if (mhz == 0 || 1'000'000 % mhz != 0)
        throw ConfigError(key + ": " + std::to_string(mhz) +
                          " MHz does not give a whole-number tick period");
}

void check_min(const std::string& key, std::uint64_t v, std::uint64_t min) {
    if (v < min)
        throw ConfigError(key + ": must be at least " + std::to_string(min) + ", got " +
                          std::to_string(v));
}

}  // namespace

std::vector<std::string> split_mesh_rows(const std::string& rows) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : rows) {
        if (ch == ';') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

RunConfig parse_config_text(const std::string& text, const std::string& filename) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::vector<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto where = [&] { return filename + ":" + std::to_string(lineno) + ": "; };
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where() + "expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        auto it = binding_map().find(key);
        if (it == binding_map().end())
            throw ConfigError(where() + "unknown key '" + key + "'");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError(where() + "duplicate key '" + key + "'");
        seen.push_back(key);
        try {
            it->second->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string dump_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& b : bindings()) {
        out += b.key;
        out += " = ";
        out += b.get(cfg);
        out += "\n";
    }
    return out;
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = binding_map().find(key);
    if (it == binding_map().end()) throw ConfigError("unknown key '" + key + "'");
    it->second->set(cfg, value);
}

std::string get_config_key(const RunConfig& cfg, const std::string& key) {
    auto it = binding_map().find(key);
    if (it == binding_map().end()) throw ConfigError("unknown key '" + key + "'");
    return it->second->get(cfg);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& b : bindings()) out.push_back(b.key);
        return out;
    }();
    return keys;
}

void validate_config(const RunConfig& cfg) {
    if (cfg.label.empty()) throw ConfigError("label: must not be empty");
    for (char ch : cfg.label)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-' && ch != '.')
            throw ConfigError("label: only letters, digits, '_', '-' and '.' are allowed");

    MeshDescription mesh;
    try {
        mesh = MeshDescription::parse(split_mesh_rows(cfg.mesh_rows));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("mesh.rows: ") + e.what());
    }
    if (mesh.core_tiles().empty()) throw ConfigError("mesh.rows: no core tiles");
    if (mesh.mem_tiles().empty()) throw ConfigError("mesh.rows: no memory tiles");
    if (mesh.slice_tiles().empty()) throw ConfigError("mesh.rows: no shared-cache slices");
    if (cfg.measured_core >= mesh.core_tiles().size())
        throw ConfigError("measured_core: mesh has only " +
                          std::to_string(mesh.core_tiles().size()) + " cores");

    check_min("noc.router_cycles", cfg.noc.router_latency_cycles, 1);
    check_min("noc.link_cycles", cfg.noc.link_latency_cycles, 1);

    check_min("mem.channels", cfg.mem.channels, 1);
    if (cfg.mem.channel_bandwidth_gib <= 0) throw ConfigError("mem.channel_gib: must be positive");
    if (cfg.mem.fixed_latency_ns < 0) throw ConfigError("mem.latency_ns: must not be negative");
    check_min("mem.capacity_mib", cfg.mem.capacity_bytes >> 20, 20);

    check_clock("core.clock_mhz", cfg.core.clock_mhz);
    check_min("core.issue_width", cfg.core.params.issue_width, 1);
    check_min("core.window", cfg.core.params.window, 1);
    check_min("core.lsq", cfg.core.params.lsq, 1);
    check_min("core.store_fifo", cfg.core.params.store_fifo, 1);
    check_min("core.drain_width", cfg.core.params.drain_width, 1);
    check_min("core.tlb_entries", cfg.core.tlb_entries, 1);
    check_geometry("core.l1i", cfg.core.l1i);
    check_geometry("core.l1d", cfg.core.l1d);
    check_geometry("core.l2", cfg.core.l2);
    if (cfg.core.stride.enabled) {
        check_min("core.stride.degree", cfg.core.stride.degree, 1);
        check_min("core.stride.table", cfg.core.stride.table_entries, 1);
    }
    check_geometry("l3", cfg.l3_slice);

    if (cfg.engine.kind != "none" && cfg.engine.kind != "dapf" && cfg.engine.kind != "qsort")
        throw ConfigError("engine.kind: unknown kind '" + cfg.engine.kind + "'");
    if (cfg.engine.kind != "none") {
        if (!cfg.engine.present)
            throw ConfigError("engine.kind: '" + cfg.engine.kind +
                              "' needs engine.present = true");
        if (!mesh.engine_tile())
            throw ConfigError("engine.kind: mesh has no engine tile");
    }
    check_clock("engine.clock_mhz", cfg.engine.clock_mhz);
    check_min("engine.tlb_entries", cfg.engine.tlb_entries, 1);
    if (cfg.engine.translation != "timed" && cfg.engine.translation != "functional")
        throw ConfigError("engine.translation: expected 'timed' or 'functional'");
    check_min("engine.queue_depth", cfg.engine.params.queue_depth, 1);
    check_min("engine.forward_cycles", cfg.engine.params.forward_cycles, 1);
    check_min("engine.forwarder_depth", cfg.engine.params.forwarder_depth, 1);
    check_geometry("engine.cache", cfg.engine.cache);
    check_min("engine.dapf.reads_per_cycle", cfg.engine.dapf_reads_per_cycle, 1);
    check_min("engine.qsort.compares_per_cycle", cfg.engine.qsort.compares_per_cycle, 1);
    check_min("engine.qsort.cutoff", cfg.engine.qsort.cutoff, 1);
    check_min("engine.qsort.store_buffer", cfg.engine.qsort.store_buffer_entries, 1);

    if (cfg.paging != "thp" && cfg.paging != "small" && cfg.paging != "huge")
        throw ConfigError("paging.policy: expected 'thp', 'small' or 'huge'");

    if (cfg.workload.kind == "bfs") {
        const auto& bfs = cfg.workload.bfs;
        if (bfs.graph.kind == GraphSpec::Kind::kronecker) {
            if (bfs.graph.scale < 1 || bfs.graph.scale > 20)
                throw ConfigError("workload.bfs.graph.scale: must be between 1 and 20");
            if (bfs.graph.degree <= 0)
                throw ConfigError("workload.bfs.graph.degree: must be positive");
        } else if (bfs.graph.path.empty()) {
            throw ConfigError("workload.bfs.graph.file: required when graph.kind is 'file'");
        }
        check_min("workload.bfs.k", bfs.k, 1);
        if (bfs.hints && cfg.engine.kind != "dapf")
            throw ConfigError("workload.bfs.hints: needs engine.kind = dapf");
    } else if (cfg.workload.kind == "qsort") {
        if (cfg.workload.qsort.mode == "offload" && cfg.engine.kind != "qsort")
            throw ConfigError("workload.qsort.mode: offload needs engine.kind = qsort");
    } else {
        throw ConfigError("workload.kind: expected 'bfs' or 'qsort'");
    }
}

}  // namespace tilesim
