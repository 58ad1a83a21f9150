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

#include "tilesim/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace tilesim {
namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_')
            out += ch;
        else
            out += '-';
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void append_row(std::string& csv, const RunConfig& cfg, const std::string& axis,
                const std::string& value, const nlohmann::json& report) {
    std::vector<std::string> cells;
    cells.push_back(cfg.label);
    cells.push_back(axis);
    cells.push_back(value);
    cells.push_back(std::to_string(report.at("total_cycles").get<std::uint64_t>()));
    const auto& speedup = report.at("speedup");
    cells.push_back(speedup.is_null() ? "" : fixed6(speedup.get<double>()));
    const auto& ltu = report.at("load_to_use");
    cells.push_back(ltu.contains("mean") ? fixed6(ltu.at("mean").get<double>()) : "");
    for (const auto& key : config_keys()) cells.push_back(get_config_key(cfg, key));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) csv += ',';
        csv += csv_field(cells[i]);
    }
    csv += '\n';
}

}  // namespace

SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), spec.axis) == keys.end()) {
        std::string msg = "unknown sweep axis '" + spec.axis + "'; valid axes:";
        for (const auto& k : keys) msg += "\n  " + k;
        throw ConfigError(msg);
    }
    if (spec.values.empty()) throw ConfigError("sweep needs at least one value");

    SweepResult out;
    out.csv = "label,axis,value,total_cycles,speedup,load_to_use_mean";
    for (const auto& key : keys) out.csv += "," + key;
    out.csv += '\n';

    RunConfig ref = base;
    for (const auto& [k, v] : spec.baseline_overrides) set_config_key(ref, k, v);
    ref.baseline.clear();
    RunResult ref_run = run_simulation(ref);
    append_row(out.csv, ref, spec.axis, "", ref_run.report);
    out.runs.push_back({ref.label, ref_run.report});
    BaselineRef pair{ref.label, ref_run.total_cycles};

    for (const auto& value : spec.values) {
        RunConfig cfg = base;
        set_config_key(cfg, spec.axis, value);
        cfg.label = base.label + "_" + sanitize(spec.axis) + "_" + sanitize(value);
        cfg.baseline = ref.label;
        RunResult r = run_simulation(cfg, pair);
        append_row(out.csv, cfg, spec.axis, value, r.report);
        out.runs.push_back({cfg.label, r.report});
    }
    return out;
}

}  // namespace tilesim
