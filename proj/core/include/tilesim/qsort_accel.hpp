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
#include <map>
#include <optional>
#include <vector>

#include "tilesim/engine.hpp"
#include "tilesim/stats.hpp"
#include "tilesim/types.hpp"

namespace tilesim {

// Command opcode: sort an array of little-endian u32 keys in place.
// arg(0) = base vaddr (4-byte aligned), arg(1) = element count.
inline constexpr std::uint8_t kQsortSortOpcode = 2;

struct QsortParams {
    std::uint32_t compares_per_cycle = 4;
    std::uint32_t cutoff = 16;  // ranges at or below this sort in-engine
    std::uint32_t store_buffer_entries = 16;
};

// Write-coalescing buffer in front of the engine's memory port. Each entry
// shadows one line; a line is written back once, when every sub-array whose
// final bytes land in it has finished. writers counts those pending
// completions: it starts at one per line and gains one for every partition
// split that falls inside the line.
class StoreBuffer {
  public:
    struct Entry {
        Addr line = 0;
        std::array<std::uint8_t, kLineBytes> data{};
        std::uint64_t valid = 0;  // bit per byte
        std::uint32_t writers = 0;
    };

    explicit StoreBuffer(std::uint32_t capacity) : capacity_(capacity) {}

    std::uint32_t capacity() const { return capacity_; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(entries_.size()); }
    bool full() const { return size() >= capacity_; }
    bool empty() const { return entries_.empty() && pending_writers_.empty(); }

    // Declares a line the task will write: one base completion is expected
    // before any split adds more. Call once per task line before sorting.
    void seed(Addr line);

    const Entry* find(Addr line) const;

    // True when every byte of [vaddr, vaddr+n) is buffered.
    bool covers(Addr vaddr, std::uint32_t n) const;

    // Buffers bytes; false when a new entry is needed but the buffer is full
    // (the caller stalls or evicts). Bytes must stay within one line.
    bool write(Addr vaddr, const std::uint8_t* bytes, std::uint32_t n);

    // Overlays buffered bytes onto line data fetched from memory.
    void merge_into(Addr line, std::array<std::uint8_t, kLineBytes>& io) const;

    // Records a future extra completion for the line holding a split point.
    void note_split(Addr line);

    // One sub-array wrote its final bytes into this line. Returns the entry
    // when no further completions are pending, ready for release to memory.
    std::optional<Entry> complete_span(Addr line);

    // Deadlock breaker: removes the oldest entry even though completions are
    // still pending; the pending count survives for the line's next entry.
    std::optional<Entry> force_evict();

  private:
    Entry* find_mut(Addr line);

    std::deque<Entry> entries_;
    std::map<Addr, std::uint32_t> pending_writers_;
    std::uint32_t capacity_;
};

// In-engine quicksort: median-of-three pivots, Hoare partitioning walked
// through two line windows, small ranges finished by insertion sort. All
// stores coalesce in the StoreBuffer so each line is written back once per
// task unless the buffer deadlock-breaks.
class QuicksortEngine : public Accelerator {
  public:
    QuicksortEngine(EngineHarness& harness, const QsortParams& p, StatRegistry& stats);

    bool step() override;
    bool idle() const override;

  private:
    struct Window {
        Addr line = ~Addr{0};
        std::array<std::uint8_t, kLineBytes> data{};
        bool have = false;
        bool pending = false;
    };

    struct Range {
        std::uint64_t lo = 0, hi = 0;
    };

    enum class Phase {
        pick_range,
        pivot_fetch,
        pivot_charge,
        scan,
        leaf_fetch,
        leaf_sort,
        drain,
    };

    bool start_task();
    void finish_task();
    void open_range(const Range& r);
    bool ensure_value(std::uint64_t idx, Window& w, std::uint32_t& out);
    // Streaming variant: promotes a lookahead hit into `w` and keeps the next
    // line of the scan direction (dir = +1 or -1 lines) in flight in `pre`.
    bool ensure_stream(std::uint64_t idx, Window& w, Window& pre, int dir, std::uint32_t& out);
    void write_elem(std::uint64_t idx, std::uint32_t v);
    void buffered_write(Addr a, const std::uint8_t* bytes, std::uint32_t n);
    void update_windows(Addr a, const std::uint8_t* bytes, std::uint32_t n);
    void fetch(Window& w, Addr line);
    void release(StoreBuffer::Entry e);
    void split_done(std::uint64_t sp);
    void leaf_complete();
    Addr addr_of(std::uint64_t idx) const { return base_ + idx * 4; }

    enum class Blocked { no, memory, credit };
    Blocked step_scan(std::uint32_t& credit);
    bool step_pivot();
    bool step_leaf_fetch();

    EngineHarness& eng_;
    QsortParams p_;
    StoreBuffer buf_;

    bool active_ = false;
    CoreId core_ = 0;
    Addr base_ = 0;
    std::uint64_t n_ = 0;
    std::vector<Range> stack_;
    Phase phase_ = Phase::pick_range;

    // Partition state. The pivot is the median of three moved to the front,
    // then the canonical Hoare do-while loop runs; it returns j with both
    // sides [lo, j+1) and [j+1, hi) non-empty.
    Range cur_{};
    std::int64_t i_ = 0, j_ = 0;
    std::uint32_t pivot_ = 0;
    bool scan_forward_ = true;
    // Set when the backward scan accepted the value at j_ but the exchange
    // still needs the value at i_; a blocked fetch must resume here, not
    // rescan (j_ has already moved).
    bool swap_pending_ = false;
    std::uint32_t swap_v_ = 0;
    bool pivot_placed_ = false;
    std::uint32_t charge_owed_ = 0;  // compares owed before progress resumes
    Window left_, right_, scratch_;
    // Lookahead for the two scan streams; hides line fetch latency behind the
    // compare budget of the line being consumed.
    Window left_pre_, right_pre_;

    // Leaf state.
    struct LeafLine {
        Addr line = 0;
        std::array<std::uint8_t, kLineBytes> data{};
        bool have = false;
    };
    std::vector<std::uint32_t> leaf_vals_;
    std::vector<LeafLine> leaf_lines_;

    std::uint32_t writes_outstanding_ = 0;
    std::deque<StoreBuffer::Entry> retry_;  // releases that faulted, to re-issue
    std::uint64_t gen_ = 0;

    std::uint64_t* compares_;
    std::uint64_t* swaps_;
    std::uint64_t* tasks_;
    std::uint64_t* forced_;
    std::uint64_t* releases_;
};

}  // namespace tilesim
