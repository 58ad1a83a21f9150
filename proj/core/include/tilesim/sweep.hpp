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

#include <string>
#include <utility>
#include <vector>

#include "tilesim/runner.hpp"

namespace tilesim {

// One sweep: the base config runs once as the reference row, then once per
// axis value with that key overridden and the reference run as baseline.
// baseline_overrides adjust only the reference row; that is how a hint or
// offload sweep pairs against a plain software run (e.g. override
// workload.bfs.hints = false while every swept row keeps hints on).
struct SweepSpec {
    std::string axis;
    std::vector<std::string> values;
    std::vector<std::pair<std::string, std::string>> baseline_overrides;
};

struct SweepRun {
    std::string label;
    nlohmann::json report;
};

struct SweepResult {
    std::string csv;  // header, reference row, one row per value
    std::vector<SweepRun> runs;
};

// Validates the axis against the config key set (the error lists all valid
// axes) and runs everything sequentially on isolated simulator instances.
SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec);

}  // namespace tilesim
