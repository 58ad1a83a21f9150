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
#include <string>

#include <nlohmann/json.hpp>

#include "tilesim/config.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

struct BaselineRef {
    std::string label;
    std::uint64_t cycles = 0;
};

// Assembles the per-run result document. total_cycles counts core-clock
// cycles of the measured pass only; workload_info carries the
// workload-specific echo (graph shape, array sizes) built by the runner.
nlohmann::json make_report(const RunConfig& cfg, const nlohmann::json& workload_info,
                           std::uint64_t total_cycles, const std::optional<BaselineRef>& baseline,
                           const StatRegistry& stats);

// Structural check mirroring the published schema; throws std::runtime_error
// naming the first violated field.
void validate_report(const nlohmann::json& report);

// The schema document itself (kept verbatim in report.schema.json; a test
// pins the two together).
nlohmann::json report_schema();

// Canonical serialization used for all emitted reports; byte-stable for a
// given report value.
std::string report_to_string(const nlohmann::json& report);

}  // namespace tilesim
