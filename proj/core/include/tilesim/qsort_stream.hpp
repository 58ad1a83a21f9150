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
#include <vector>

#include "tilesim/core_model.hpp"
#include "tilesim/layout.hpp"
#include "tilesim/stats.hpp"

namespace tilesim {

struct QsortCounts {
    std::uint64_t compares = 0;
    std::uint64_t swaps = 0;
};

// Host-side quicksort with the exact rule set both simulated variants use:
// median-of-three moved to the front, canonical Hoare partitioning, ranges
// at or below cutoff finished by insertion sort. Counts every key compare
// (three per median pick) and every partition swap (pivot placement
// included). The instrumented counts are the parity oracle for the in-core
// stream and the engine.
QsortCounts reference_quicksort(std::vector<std::uint32_t>& v, std::uint32_t cutoff);

// Emits the same quicksort as a micro-op stream over the mapped array. Scan
// loads carry no dependency edges (the loop is predictable); each compare is
// a compute fed by its load, swaps are two stores. Registers qsw.compares
// and qsw.swaps, which must match reference_quicksort on the same input.
class SoftwareQsortSource : public OpSource {
  public:
    SoftwareQsortSource(const QsortLayout& l, std::vector<std::uint32_t> input,
                        std::uint32_t cutoff, std::uint64_t base_seq, StatRegistry& stats);

    std::optional<MicroOp> next() override;
    bool finished() const override;

    std::uint64_t emitted() const { return emitted_; }
    const std::vector<std::uint32_t>& mirror() const { return a_; }

  private:
    enum class St : std::uint8_t {
        pick,
        pv_loads,
        pv_med,
        pv_place,
        fwd_load,
        fwd_cmp,
        bwd_load,
        bwd_cmp,
        swap,
        leaf,
    };

    struct Range {
        std::uint64_t lo = 0, hi = 0;
    };

    MicroOp out(MicroOp op);
    std::uint64_t seq_now() const { return base_seq_ + emitted_; }
    Addr addr_of(std::uint64_t idx) const { return l_.base + idx * 4; }
    void open_range();
    void open_leaf(const Range& r);
    void finish_partition();

    QsortLayout l_;
    std::vector<std::uint32_t> a_;
    std::uint32_t cutoff_;
    std::uint64_t base_seq_;

    std::vector<Range> stack_;
    St st_ = St::pick;
    Range cur_{};
    std::uint64_t emitted_ = 0;

    // Partition scratch.
    std::uint32_t pivot_ = 0;
    std::int64_t i_ = 0, j_ = 0;
    std::uint64_t med_idx_ = 0;
    std::uint32_t sub_ = 0;  // substep within multi-op states
    std::uint64_t pv_seq_[3] = {kNoDep, kNoDep, kNoDep};
    std::uint64_t med_seq_ = kNoDep;
    std::uint64_t f_load_seq_ = kNoDep, b_load_seq_ = kNoDep;

    // Pre-generated ops for the current leaf.
    std::vector<MicroOp> leaf_ops_;
    std::size_t leaf_at_ = 0;

    std::uint64_t* compares_;
    std::uint64_t* swaps_;
};

// Drives the engine-offloaded sort: one command store, then status-poll
// loads until the engine reports done.
class OffloadQsortSource : public OpSource {
  public:
    OffloadQsortSource(Addr doorbell, Addr status_addr, Addr base, std::uint64_t n);

    std::optional<MicroOp> next() override;
    bool finished() const override;

    bool faulted() const { return faulted_; }

  private:
    Addr doorbell_;
    Addr status_addr_;
    Addr base_;
    std::uint64_t n_;
    bool sent_ = false;
    bool waiting_ = false;
    bool done_ = false;
    bool faulted_ = false;
};

}  // namespace tilesim
