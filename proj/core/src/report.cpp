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

#include "tilesim/report.hpp"

#include <stdexcept>

namespace tilesim {

using nlohmann::json;

json make_report(const RunConfig& cfg, const json& workload_info, std::uint64_t total_cycles,
                 const std::optional<BaselineRef>& baseline, const StatRegistry& stats) {
    json out;
    out["schema_version"] = 1;
    out["label"] = cfg.label;
    out["seed"] = cfg.seed;
    out["measured_core"] = cfg.measured_core;
    out["workload"] = workload_info;
    out["total_cycles"] = total_cycles;
    if (baseline) {
        out["baseline"] = {{"label", baseline->label}, {"cycles", baseline->cycles}};
        out["speedup"] =
            static_cast<double>(baseline->cycles) / static_cast<double>(total_cycles);
    } else {
        out["baseline"] = {{"label", nullptr}, {"cycles", nullptr}};
        out["speedup"] = nullptr;
    }
    json all = stats.to_json();
    std::string prefix = "cpu" + std::to_string(cfg.measured_core);
    out["load_to_use"] = all.value(prefix + ".load_to_use", json::object());
    out["uc_round_trip"] = all.value(prefix + ".uc_round_trip", json::object());
    out["stats"] = std::move(all);
    return out;
}

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw std::runtime_error("report: " + what);
}

void need(const json& o, const char* key, json::value_t type) {
    if (!o.contains(key)) bad(std::string("missing field '") + key + "'");
    const json& v = o.at(key);
    if (type == json::value_t::number_unsigned) {
        // In-memory documents may hold plain int literals; only the sign matters.
        const bool ok = v.is_number_unsigned() ||
                        (v.is_number_integer() && v.get<std::int64_t>() >= 0);
        if (!ok) bad(std::string("field '") + key + "' must be a non-negative integer");
    } else if (type == json::value_t::number_float) {
        if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
    } else if (v.type() != type) {
        bad(std::string("field '") + key + "' has the wrong type");
    }
}

void check_histogram(const json& h, const char* name) {
    if (!h.is_object()) bad(std::string(name) + " must be an object");
    if (h.empty()) return;  // absent-core placeholder
    for (const char* k : {"count", "sum", "min", "max"}) need(h, k, json::value_t::number_unsigned);
    need(h, "mean", json::value_t::number_float);
    need(h, "buckets", json::value_t::object);
    for (const auto& [key, v] : h.at("buckets").items()) {
        (void)key;
        if (!v.is_number_unsigned()) bad(std::string(name) + " bucket counts must be unsigned");
    }
}

}  // namespace

void validate_report(const json& r) {
    if (!r.is_object()) bad("not an object");
    need(r, "schema_version", json::value_t::number_unsigned);
    if (r.at("schema_version") != 1) bad("unsupported schema_version");
    need(r, "label", json::value_t::string);
    need(r, "seed", json::value_t::number_unsigned);
    need(r, "measured_core", json::value_t::number_unsigned);
    need(r, "total_cycles", json::value_t::number_unsigned);
    need(r, "workload", json::value_t::object);
    const json& w = r.at("workload");
    need(w, "kind", json::value_t::string);
    std::string kind = w.at("kind");
    if (kind == "bfs") {
        need(w, "graph", json::value_t::object);
        const json& g = w.at("graph");
        need(g, "nodes", json::value_t::number_unsigned);
        need(g, "half_edges", json::value_t::number_unsigned);
        need(g, "avg_degree", json::value_t::number_float);
        need(g, "frac_degree_over_128", json::value_t::number_float);
        need(w, "source", json::value_t::number_unsigned);
        need(w, "source2", json::value_t::number_unsigned);
        need(w, "hints", json::value_t::boolean);
        need(w, "k", json::value_t::number_unsigned);
    } else if (kind == "qsort") {
        need(w, "n", json::value_t::number_unsigned);
        need(w, "mode", json::value_t::string);
    } else {
        bad("workload.kind must be 'bfs' or 'qsort'");
    }
    need(w, "footprint_bytes", json::value_t::number_unsigned);

    need(r, "baseline", json::value_t::object);
    const json& b = r.at("baseline");
    if (!b.contains("label") || !b.contains("cycles")) bad("baseline needs label and cycles");
    bool has_base = !b.at("label").is_null();
    if (has_base && !b.at("label").is_string()) bad("baseline.label must be a string or null");
    if (has_base != !b.at("cycles").is_null()) bad("baseline.label and cycles must agree");
    if (has_base && !b.at("cycles").is_number_unsigned()) bad("baseline.cycles must be unsigned");
    if (!r.contains("speedup")) bad("missing field 'speedup'");
    if (has_base) {
        if (!r.at("speedup").is_number()) bad("speedup must be a number when baseline is set");
    } else if (!r.at("speedup").is_null()) {
        bad("speedup must be null without a baseline");
    }

    if (!r.contains("load_to_use")) bad("missing field 'load_to_use'");
    check_histogram(r.at("load_to_use"), "load_to_use");
    if (!r.contains("uc_round_trip")) bad("missing field 'uc_round_trip'");
    check_histogram(r.at("uc_round_trip"), "uc_round_trip");

    need(r, "stats", json::value_t::object);
    for (const auto& [key, v] : r.at("stats").items()) {
        if (v.is_number_unsigned()) continue;
        check_histogram(v, key.c_str());
    }
}

json report_schema() {
    json histogram = {
        {"type", "object"},
        {"properties",
         {{"count", {{"type", "integer"}, {"minimum", 0}}},
          {"sum", {{"type", "integer"}, {"minimum", 0}}},
          {"mean", {{"type", "number"}}},
          {"min", {{"type", "integer"}, {"minimum", 0}}},
          {"max", {{"type", "integer"}, {"minimum", 0}}},
          {"buckets",
           {{"type", "object"},
            {"additionalProperties", {{"type", "integer"}, {"minimum", 0}}}}}}},
        {"additionalProperties", false}};

    json schema = {
        {"$schema", "http://json-schema.org/draft-07/schema#"},
        {"title", "tilesim run report"},
        {"type", "object"},
        {"required",
         {"schema_version", "label", "seed", "measured_core", "workload", "total_cycles",
          "baseline", "speedup", "load_to_use", "uc_round_trip", "stats"}},
        {"properties",
         {{"schema_version", {{"const", 1}}},
          {"label", {{"type", "string"}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}}},
          {"measured_core", {{"type", "integer"}, {"minimum", 0}}},
          {"workload",
           {{"type", "object"},
            {"required", {"kind", "footprint_bytes"}},
            {"properties",
             {{"kind", {{"enum", {"bfs", "qsort"}}}},
              {"footprint_bytes", {{"type", "integer"}, {"minimum", 0}}},
              {"graph",
               {{"type", "object"},
                {"required", {"nodes", "half_edges", "avg_degree", "frac_degree_over_128"}},
                {"properties",
                 {{"nodes", {{"type", "integer"}, {"minimum", 0}}},
                  {"half_edges", {{"type", "integer"}, {"minimum", 0}}},
                  {"avg_degree", {{"type", "number"}}},
                  {"frac_degree_over_128", {{"type", "number"}}}}}}},
              {"source", {{"type", "integer"}, {"minimum", 0}}},
              {"source2", {{"type", "integer"}, {"minimum", 0}}},
              {"hints", {{"type", "boolean"}}},
              {"k", {{"type", "integer"}, {"minimum", 1}}},
              {"n", {{"type", "integer"}, {"minimum", 0}}},
              {"mode", {{"enum", {"software", "offload"}}}}}}}},
          {"total_cycles", {{"type", "integer"}, {"minimum", 0}}},
          {"baseline",
           {{"type", "object"},
            {"required", {"label", "cycles"}},
            {"properties",
             {{"label", {{"type", {"string", "null"}}}},
              {"cycles", {{"type", {"integer", "null"}}}}}},
            {"additionalProperties", false}}},
          {"speedup", {{"type", {"number", "null"}}}},
          {"load_to_use", {{"$ref", "#/definitions/histogram"}}},
          {"uc_round_trip", {{"$ref", "#/definitions/histogram"}}},
          {"stats",
           {{"type", "object"},
            {"additionalProperties",
             {{"oneOf",
               {{{"type", "integer"}, {"minimum", 0}}, {{"$ref", "#/definitions/histogram"}}}}}}}}}},
        {"definitions", {{"histogram", histogram}}},
        {"additionalProperties", false}};
    return schema;
}

std::string report_to_string(const json& report) { return report.dump(2) + "\n"; }

}  // namespace tilesim
