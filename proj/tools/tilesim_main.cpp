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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tilesim/runner.hpp"
#include "tilesim/sweep.hpp"

namespace fs = std::filesystem;
using tilesim::ConfigError;

namespace {

// --out beats TILESIM_OUT beats the working directory.
std::string resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("TILESIM_OUT"); env && *env) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<tilesim::BaselineRef> resolve_baseline(const tilesim::RunConfig& cfg,
                                                     const std::string& out_dir) {
    if (cfg.baseline.empty()) return std::nullopt;
    fs::path path = fs::path(out_dir) / (cfg.baseline + ".report.json");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("baseline: no report for label '" + cfg.baseline + "' (" +
                          path.string() + "); run the baseline config first");
    nlohmann::json report = nlohmann::json::parse(in);
    tilesim::validate_report(report);
    return tilesim::BaselineRef{cfg.baseline, report.at("total_cycles").get<std::uint64_t>()};
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
    tilesim::RunConfig cfg = tilesim::parse_config_file(config_path);
    tilesim::validate_config(cfg);
    const std::string out_dir = resolve_out_dir(out_flag);
    auto baseline = resolve_baseline(cfg, out_dir);
    tilesim::RunResult r = tilesim::run_simulation(cfg, baseline);
    fs::path path = fs::path(out_dir) / (cfg.label + ".report.json");
    write_file(path, tilesim::report_to_string(r.report));
    std::cout << cfg.label << ": " << r.total_cycles << " cycles";
    if (baseline)
        std::cout << ", speedup " << r.report.at("speedup").get<double>() << " vs "
                  << baseline->label;
    std::cout << " -> " << path.string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& baseline_overrides, const std::string& out_flag) {
    tilesim::RunConfig cfg = tilesim::parse_config_file(config_path);
    tilesim::validate_config(cfg);
    tilesim::SweepSpec spec;
    spec.axis = axis;
    for (const auto& v : split(values, ',')) {
        if (!v.empty()) spec.values.push_back(v);
    }
    if (!baseline_overrides.empty()) {
        for (const auto& kv : split(baseline_overrides, ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--baseline expects key=value pairs, got '" + kv + "'");
            spec.baseline_overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
    }
    const std::string out_dir = resolve_out_dir(out_flag);
    tilesim::SweepResult result = tilesim::run_sweep(cfg, spec);
    for (const auto& run : result.runs)
        write_file(fs::path(out_dir) / (run.label + ".report.json"),
                   tilesim::report_to_string(run.report));
    fs::path csv_path = fs::path(out_dir) / "sweep.csv";
    write_file(csv_path, result.csv);
    std::cout << result.runs.size() << " runs (1 reference + " << spec.values.size()
              << " values) -> " << csv_path.string() << "\n";
    return 0;
}

int cmd_gen_graph(const std::string& spec_str, const std::string& out_path) {
    tilesim::GraphSpec spec;
    for (const auto& kv : split(spec_str, ',')) {
        if (kv.empty()) continue;
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("graph spec expects key=value pairs, got '" + kv + "'");
        std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "scale")
            spec.scale = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "degree")
            spec.degree = std::stod(value);
        else if (key == "seed")
            spec.seed = std::stoull(value);
        else if (key == "file") {
            spec.kind = tilesim::GraphSpec::Kind::file;
            spec.path = value;
        } else {
            throw ConfigError("graph spec: unknown key '" + key +
                              "' (expected scale, degree, seed or file)");
        }
    }
    tilesim::CsrGraph g = tilesim::build_graph(spec);
    fs::path path(out_path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (path.extension() == ".csr")
        tilesim::write_csr1(g, out);
    else
        tilesim::write_edge_list(g, out);
    std::cout << path.string() << ": " << g.n << " nodes, " << g.half_edges() / 2 << " edges, "
              << "avg degree " << g.avg_degree() << ", frac(deg>128) " << g.degree_skew(128)
              << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    tilesim::RunConfig cfg = tilesim::parse_config_file(config_path);
    tilesim::validate_config(cfg);
    std::cout << tilesim::dump_config(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilesim: cycle-approximate mesh-cache simulator with a near-memory engine"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values, baseline_overrides, spec_str, out_path;

    auto* run = app.add_subcommand("run", "Run one config and write <label>.report.json");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Output directory (default $TILESIM_OUT or '.')");

    auto* sweep = app.add_subcommand("sweep", "Run a one-axis parameter sweep and write sweep.csv");
    sweep->add_option("config", config_path, "Base config file")->required();
    sweep->add_option("--axis", axis, "Config key to sweep")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--baseline", baseline_overrides,
                      "key=value overrides applied only to the reference run");
    sweep->add_option("--out", out_dir, "Output directory (default $TILESIM_OUT or '.')");

    auto* gen = app.add_subcommand("gen-graph", "Generate or convert a graph");
    gen->add_option("spec", spec_str,
                    "scale=S,degree=D,seed=N for a synthetic graph, or file=PATH to convert")
        ->required();
    gen->add_option("-o,--output", out_path, "Output file (.csr binary, else edge list)")
        ->required();

    auto* validate = app.add_subcommand("validate", "Check a config and print its effective form");
    validate->add_option("config", config_path, "Config file")->required();

    auto* schema = app.add_subcommand("schema", "Print the report JSON schema");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(config_path, axis, values, baseline_overrides, out_dir);
        if (gen->parsed()) return cmd_gen_graph(spec_str, out_path);
        if (validate->parsed()) return cmd_validate(config_path);
        if (schema->parsed()) {
            std::cout << tilesim::report_schema().dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
