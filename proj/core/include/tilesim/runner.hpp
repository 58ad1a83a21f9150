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

#include <optional>

#include "tilesim/config.hpp"
#include "tilesim/layout.hpp"
#include "tilesim/report.hpp"

namespace tilesim {

// Observation hooks for tests; all optional. Addresses are virtual.
struct RunHooks {
    std::function<void(std::uint64_t target_index)> on_hint;  // prefetcher accepted a hint
    std::function<void(Addr line)> on_prefetch;               // prefetcher issued a line fetch
};

struct RunResult {
    nlohmann::json report;
    std::uint64_t total_cycles = 0;  // measured pass, core clock

    // Post-run image of the mapped workload arrays, starting at image_base.
    // Unmapped holes between regions read as zero.
    Addr image_base = 0;
    std::vector<std::uint8_t> image;

    BfsLayout bfs;      // bfs runs
    QsortLayout qsort;  // qsort runs

    std::uint64_t u64_at(Addr vaddr) const;
    std::uint8_t u8_at(Addr vaddr) const;
};

// Builds the machine from the config, runs the workload to completion,
// checks the result against the host-side reference and returns the report.
// The caller resolves the baseline label to a cycle count beforehand (the
// CLI reads the named report file; sweeps keep it in memory).
RunResult run_simulation(const RunConfig& cfg, const std::optional<BaselineRef>& baseline = {},
                         const RunHooks* hooks = nullptr);

}  // namespace tilesim
