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

#include <stdexcept>
#include <string>
#include <vector>

#include "tilesim/cache_agent.hpp"
#include "tilesim/core_model.hpp"
#include "tilesim/dapf.hpp"
#include "tilesim/engine.hpp"
#include "tilesim/graph.hpp"
#include "tilesim/memctrl.hpp"
#include "tilesim/noc.hpp"
#include "tilesim/qsort_accel.hpp"

namespace tilesim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a run needs, with desk-scale defaults. The reference machine's
// capacities are kept where they are already small (L1s, engine cache) and
// scaled down where they are not (L2 1 MiB -> 256 KiB, L3 4 MiB -> 64 KiB
// per slice, memory 3 GiB -> 64 MiB), so default runs finish in seconds
// while keeping the same hierarchy shape and latencies.
struct RunConfig {
    std::string label = "run";
    std::uint64_t seed = 1;
    // Label of a previously written report in the output directory; when
    // set, the report carries speedup = baseline cycles / this run's cycles.
    std::string baseline;
    std::uint32_t measured_core = 1;
    bool checked = false;  // per-event coherence scans plus data-value shadow

    std::string mesh_rows = "C L L M;L . L M;E L L C";
    NocParams noc;
    MemParams mem;

    struct Core {
        std::uint32_t clock_mhz = 4000;
        CoreParams params;
        std::uint32_t tlb_entries = 64;
        CacheGeometry l1i{32 << 10, 8, 4, 4, 8};
        CacheGeometry l1d{48 << 10, 12, 4, 4, 16};
        CacheGeometry l2{256 << 10, 16, 12, 4, 32};
        StridePrefetcherParams stride;
    } core;

    CacheGeometry l3_slice{64 << 10, 16, 8, 8, 16};

    struct Engine {
        // present=false removes the engine tile's cache and harness
        // entirely; kind "none" keeps them instantiated but inert.
        bool present = true;
        std::string kind = "none";  // none | dapf | qsort
        std::uint32_t clock_mhz = 1000;
        std::uint32_t tlb_entries = 1;
        std::string translation = "timed";  // timed | functional
        EngineParams params;
        CacheGeometry cache{512 << 10, 8, 10, 4, 32};
        std::uint32_t dapf_reads_per_cycle = 2;
        QsortParams qsort;
    } engine;

    std::string paging = "thp";  // thp | small | huge

    struct Workload {
        std::string kind = "bfs";  // bfs | qsort
        struct Bfs {
            GraphSpec graph;
            std::uint64_t source = 0;   // warm-up pass root
            std::uint64_t source2 = 1;  // measured pass root
            bool hints = false;
            std::uint32_t k = 4;  // hint look-ahead distance
        } bfs;
        struct Qsort {
            std::uint64_t n = 10000;
            std::uint64_t seed = 7;
            std::string mode = "software";  // software | offload
        } qsort;
    } workload;
};

// Flat `section.key = value` text with optional `[section]` headers and '#'
// comments. Unknown keys, duplicate keys and malformed values are reported
// as "<file>:<line>: ...". Missing keys keep their defaults.
RunConfig parse_config_text(const std::string& text, const std::string& filename = "<config>");
RunConfig parse_config_file(const std::string& path);

// Canonical form: every key, sorted, one per line. parse(dump(c)) == c.
std::string dump_config(const RunConfig& cfg);

// Structural and range checks beyond per-value parsing; throws ConfigError
// naming the offending key path.
void validate_config(const RunConfig& cfg);

// Sets one key from its text form (the sweep hook). Throws ConfigError for
// unknown keys or bad values.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_key(const RunConfig& cfg, const std::string& key);
const std::vector<std::string>& config_keys();

std::vector<std::string> split_mesh_rows(const std::string& rows);

}  // namespace tilesim
