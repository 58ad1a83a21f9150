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

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "tilesim/dig.hpp"
#include "tilesim/engine.hpp"
#include "tilesim/stats.hpp"
#include "tilesim/types.hpp"

namespace tilesim {

// Command opcode: prefetch hint. arg(0) carries the queue index the sender is
// currently consuming; the engine walks the entry `distance` slots ahead.
inline constexpr std::uint8_t kDapfHintOpcode = 1;

struct DapfParams {
    std::uint32_t distance = 4;         // look-ahead in queue slots
    std::uint32_t reads_per_cycle = 2;  // line fetch issue budget
};

// Data-aware prefetcher. Consumes hint commands, walks the configured
// indirection chain through the engine-side cache and drops every touched
// line there, where on-chip coherence makes it cheap for cores to pull.
class DataAwarePrefetcher : public Accelerator {
  public:
    DataAwarePrefetcher(EngineHarness& harness, const DapfParams& p, StatRegistry& stats);

    bool step() override;
    bool idle() const override;

    // Test hooks: on_hint fires when a hint command is accepted, with the
    // queue index it resolves to; on_prefetch once per issued line fetch.
    std::function<void(std::uint64_t target_index)> on_hint;
    std::function<void(Addr line)> on_prefetch;

  private:
    enum class Stage { queue_issue, queue_wait, range_issue, range_wait, edge_reads, draining };

    struct Hint {
        std::uint64_t target = 0;  // queue index being walked
        Stage stage = Stage::queue_issue;
        std::uint64_t u = 0;               // node index read from the queue
        std::uint64_t lo = 0, hi = 0;      // edge span once known
        std::uint64_t next_edge = 0;       // next span index to issue
        bool lo_seen = false, hi_seen = false;
        std::uint32_t outstanding = 0;     // reads in flight
        bool aborted = false;
        std::deque<Addr> fetch_only;       // lines fetched without parsing
        std::vector<Addr> touched;         // per-hint line dedup
    };

    bool pop_hint();
    void abort_hint();
    void guarded_read(Addr a,
                      std::function<void(const std::array<std::uint8_t, kLineBytes>&)> on_data,
                      std::function<void()> on_fault);
    void issue_queue_read(std::uint32_t& budget);
    bool issue_range_reads(std::uint32_t& budget);
    bool issue_edge_read(std::uint32_t& budget);
    void parse_edge_line(Addr line, const std::array<std::uint8_t, 64>& data);
    bool touch(Addr a);  // returns true when the line is new for this hint
    void fetch_line(Addr line);

    EngineHarness& eng_;
    DapfParams p_;
    DigDescriptor dig_;
    bool dig_loaded_ = false;
    std::optional<Hint> hint_;
    std::uint64_t gen_ = 0;        // bumped per hint; stale completions check it
    std::uint32_t next_core_ = 0;  // round-robin over per-core queues

    std::uint64_t* hints_;
    std::uint64_t* lines_;
    std::uint64_t* abandoned_;
    std::uint64_t* bad_cmds_;
};

}  // namespace tilesim
